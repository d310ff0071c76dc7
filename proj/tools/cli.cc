// Copyright 2026 The Episode Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "episode_forge/diversity.h"
#include "episode_forge/dpp.h"
#include "episode_forge/embeddings.h"
#include "episode_forge/episodes.h"
#include "episode_forge/error.h"
#include "episode_forge/experiment.h"
#include "episode_forge/rng.h"
#include "episode_forge/samplers.h"
#include "episode_forge/stats.h"
#include "json.hpp"

namespace episode_forge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kVersion[] = "0.1.0";
constexpr char kManifest[] = "manifest.cfg";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  bool timing = false;
};

struct WorldArgs {
  std::string embeddings;
  std::vector<double> synth;
  double noise = 0.1;
};

struct SamplerArgs {
  std::string kind = "uniform";
  int n_way = 5;
  int meta_batch_size = 32;
  int ohtm_buffer_min = 50;
  double ohtm_hard_fraction = 0.5;
  int ddpp_warmup = 500;
  int bounded_pool_size = 32;

  SamplerConfig Resolve(std::uint64_t seed) const {
    SamplerConfig c;
    c.kind = ParseSamplerKind(kind);
    c.n_way = n_way;
    c.meta_batch_size = meta_batch_size;
    c.ohtm_buffer_min = ohtm_buffer_min;
    c.ohtm_hard_fraction = ohtm_hard_fraction;
    c.ddpp_warmup_batches = ddpp_warmup;
    c.bounded_pool_size = bounded_pool_size;
    c.seed = seed;
    c.Validate();
    return c;
  }
};

void AddCommon(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads; 1 is bit-exact")
      ->envname("EPISODE_FORGE_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--timing", c.timing, "Record wall-clock time in the manifest")
      ->capture_default_str();
}

void AddWorld(CLI::App* sub, WorldArgs& w) {
  sub->add_option("--embeddings", w.embeddings, "Class embedding CSV");
  sub->add_option("--synth", w.synth,
                  "Synthetic world: classes,dim,spread,noise")
      ->delimiter(',')
      ->expected(4);
  sub->add_option("--noise", w.noise,
                  "Example noise around --embeddings class vectors")
      ->capture_default_str();
}

void AddSampler(CLI::App* sub, SamplerArgs& s) {
  sub->add_option("--sampler", s.kind, "Task sampler")->capture_default_str();
  sub->add_option("--n-way", s.n_way, "Classes per task")->capture_default_str();
  sub->add_option("--meta-batch-size", s.meta_batch_size, "Tasks per meta-batch")
      ->capture_default_str();
  sub->add_option("--ohtm-buffer-min", s.ohtm_buffer_min,
                  "Tasks seen before hard-task mining starts")
      ->capture_default_str();
  sub->add_option("--ohtm-hard-fraction", s.ohtm_hard_fraction,
                  "Fraction of each meta-batch taken from the hardest tasks")
      ->capture_default_str();
  sub->add_option("--ddpp-warmup", s.ddpp_warmup,
                  "Uniform batches before ddpp switches to the model")
      ->capture_default_str();
  sub->add_option("--bounded-pool-size", s.bounded_pool_size,
                  "Task pool size for sbu_bounded")
      ->capture_default_str();
}

SyntheticWorld LoadWorld(const WorldArgs& w, std::uint64_t seed) {
  if (!w.embeddings.empty() && !w.synth.empty()) {
    throw UsageError("--embeddings and --synth are mutually exclusive");
  }
  if (!w.synth.empty()) {
    const double c = w.synth[0], d = w.synth[1];
    if (c < 1 || d < 1 || c != static_cast<int>(c) || d != static_cast<int>(d)) {
      throw UsageError("--synth classes and dim must be positive integers");
    }
    return SynthGaussianWorld(static_cast<int>(c), static_cast<int>(d),
                              w.synth[2], w.synth[3], seed);
  }
  if (w.embeddings.empty()) {
    throw UsageError("one of --embeddings or --synth is required");
  }
  EmbeddingTable table = ReadEmbeddingsCsv(w.embeddings);
  std::vector<Vector> means(table.id_bound(), Vector(table.dim(), 0.0));
  for (ClassId id : table.ids()) means[static_cast<std::size_t>(id)] = table.at(id);
  auto source = std::make_shared<const GaussianExampleSource>(std::move(means),
                                                              w.noise);
  ClassPool pool(table.ids(), std::move(source), Split::kTrain);
  return SyntheticWorld{std::move(pool), std::move(table)};
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  f << content;
  f.close();
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

fs::path PrepareDir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + p.string());
  return p;
}

// Flat key=value record of every flag's resolved value; readable back with
// --config. `resolved` overrides values computed after parsing.
void WriteManifest(const fs::path& dir, const CLI::App& sub,
                   const Common& common,
                   const std::vector<std::string>& outputs,
                   const std::map<std::string, std::string>& resolved,
                   std::chrono::system_clock::time_point start) {
  std::ostringstream m;
  m << "# episode_forge " << kVersion << " manifest\n";
  m << "# command: " << sub.get_name() << "\n";
  m << "# outputs:";
  for (const auto& o : outputs) m << " " << o;
  m << "\n";
  if (common.timing) {
    const auto now = std::chrono::system_clock::now();
    m << "# started_unix_ms: "
      << std::chrono::duration_cast<std::chrono::milliseconds>(
             start.time_since_epoch())
             .count()
      << "\n# elapsed_s: "
      << std::chrono::duration<double>(now - start).count() << "\n";
  }
  m << "[" << sub.get_name() << "]\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (auto it = resolved.find(name); it != resolved.end()) {
      value = it->second;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (r.size() == 1) {
        value = r.front();
      } else {
        value = "[";
        for (std::size_t i = 0; i < r.size(); ++i) {
          value += (i ? "," : "") + r[i];
        }
        value += "]";
      }
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    m << name << "=" << value << "\n";
  }
  WriteFile(dir / kManifest, m.str());
}

std::string Join(const std::vector<std::string>& parts, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

std::string SummaryLine(const MeanCi& ci) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g \xC2\xB1 %.6g", ci.mean, ci.halfwidth);
  return buf;
}

std::string CurveCsv(const std::vector<CurvePoint>& curve) {
  std::string s = "epoch,mean_metric\n";
  for (const CurvePoint& p : curve) {
    s += std::to_string(p.epoch) + "," + FormatDouble(p.mean_metric) + "\n";
  }
  return s;
}

std::string PerTaskCsv(const std::vector<double>& metrics) {
  std::string s = "task_index,metric\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    s += std::to_string(i) + "," + FormatDouble(metrics[i]) + "\n";
  }
  return s;
}

std::vector<double> ReadPerTaskCsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) {
    throw Error(ErrorCode::kEmptyInput, path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "task_index,metric") {
    throw Error(ErrorCode::kParse,
                path + ":1: expected header task_index,metric");
  }
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::kRaggedRow, where + ": expected 2 fields");
    }
    try {
      std::size_t used = 0;
      const long idx = std::stol(line.substr(0, comma), &used);
      if (used != comma || idx != static_cast<long>(values.size())) {
        throw Error(ErrorCode::kParse, where + ": task_index out of sequence");
      }
      const std::string v = line.substr(comma + 1);
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      values.push_back(x);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParse, where + ": not a number");
    }
  }
  return values;
}

// ---------------------------------------------------------------------------

struct DiversityCmd {
  Common common;
  WorldArgs world;
  std::vector<std::string> samplers;
  int n_way = 5;
  DiversityProtocol protocol;
  std::string out_dir = ".";

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    AddWorld(sub, world);
    for (SamplerKind k : AllSamplerKinds()) {
      samplers.emplace_back(SamplerKindName(k));
    }
    sub->add_option("--samplers", samplers, "Sampler kinds, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--n-way", n_way, "Classes per task")->capture_default_str();
    sub->add_option("--batches", protocol.n_batches, "Meta-batches per seed")
        ->capture_default_str();
    sub->add_option("--batch-size", protocol.batch_size, "Tasks per meta-batch")
        ->capture_default_str();
    sub->add_option("--seeds", protocol.n_seeds, "Seeds averaged")
        ->capture_default_str();
    sub->add_option("--warm-start", protocol.warm_start,
                    "Measure ohtm/ddpp after their buffer fill and warmup")
        ->capture_default_str();
    sub->add_option("--out-dir", out_dir, "Output directory")
        ->capture_default_str();
  }

  int Run(const CLI::App& sub, std::ostream& out) {
    const auto start = std::chrono::system_clock::now();
    if (protocol.n_batches < 1 || protocol.batch_size < 1 || protocol.n_seeds < 1) {
      throw UsageError("--batches, --batch-size and --seeds must be >= 1");
    }
    const SyntheticWorld w = LoadWorld(world, common.seed);
    std::vector<SamplerKind> kinds;
    for (const auto& s : samplers) kinds.push_back(ParseSamplerKind(s));
    DifficultyFn difficulty;
    if (std::find(kinds.begin(), kinds.end(), SamplerKind::kOhtm) != kinds.end()) {
      difficulty = BriefProtonetDifficulty(w.pool, common.seed, common.threads);
    }
    SamplerConfig base;
    base.n_way = n_way;
    base.seed = common.seed;
    auto table = std::make_shared<const EmbeddingTable>(w.table);
    const DiversityReport report = MakeDiversityReport(
        kinds, base, w.pool, table, protocol, difficulty, common.threads);

    std::string csv = "sampler,od_normalized\n";
    for (const SamplerDiversity& s : report.samplers) {
      csv += std::string(SamplerKindName(s.kind)) + "," +
             FormatDouble(s.normalized) + "\n";
    }
    json j;
    j["manifest"] = kManifest;
    j["protocol"] = {{"n_batches", protocol.n_batches},
                     {"batch_size", protocol.batch_size},
                     {"n_seeds", protocol.n_seeds},
                     {"warm_start", protocol.warm_start},
                     {"n_way", n_way}};
    j["uniform_raw"] = report.uniform_raw;
    j["samplers"] = json::array();
    for (const SamplerDiversity& s : report.samplers) {
      json js;
      js["sampler"] = SamplerKindName(s.kind);
      js["raw"] = s.raw;
      js["od_normalized"] = s.normalized;
      js["seeds"] = json::array();
      for (const SeedRecord& seed : s.seeds) {
        json jseed;
        jseed["seed"] = seed.seed;
        jseed["overall_diversity"] = seed.overall_diversity;
        jseed["batches"] = json::array();
        for (const BatchRecord& b : seed.batches) {
          jseed["batches"].push_back({{"task_diversity", b.task_diversity},
                                      {"task_embeddings", b.task_embeddings},
                                      {"batch_diversity", b.batch_diversity},
                                      {"batch_embedding", b.batch_embedding}});
        }
        js["seeds"].push_back(std::move(jseed));
      }
      j["samplers"].push_back(std::move(js));
    }
    const fs::path dir = PrepareDir(out_dir);
    WriteFile(dir / "diversity.csv", csv);
    WriteFile(dir / "diversity.json", j.dump(1) + "\n");
    WriteManifest(dir, sub, common, {"diversity.csv", "diversity.json"}, {},
                  start);
    out << csv;
    return 0;
  }
};

struct SampleCmd {
  Common common;
  WorldArgs world;
  SamplerArgs sampler;
  int count = 1;
  int shots = 5;
  int queries = kDefaultQueries;
  std::string out_file;

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    AddWorld(sub, world);
    AddSampler(sub, sampler);
    sub->add_option("--count", count, "Meta-batches to emit")->capture_default_str();
    sub->add_option("--shots", shots, "Support examples per class")
        ->capture_default_str();
    sub->add_option("--queries", queries, "Query examples per class")
        ->capture_default_str();
    sub->add_option("--out", out_file, "Output file (default: stdout)");
  }

  int Run(const CLI::App& sub, std::ostream& out) {
    const auto start = std::chrono::system_clock::now();
    if (count < 1 || shots < 1 || queries < 1) {
      throw UsageError("--count, --shots and --queries must be >= 1");
    }
    const SyntheticWorld w = LoadWorld(world, common.seed);
    const SamplerConfig config = sampler.Resolve(common.seed);
    auto table = std::make_shared<const EmbeddingTable>(w.table);
    TaskSampler s(config, ClassificationDomain(w.pool, config.n_way,
                                               IsDppKind(config.kind)
                                                   ? table
                                                   : nullptr));
    DifficultyFn difficulty;
    if (config.kind == SamplerKind::kOhtm) {
      difficulty = BriefProtonetDifficulty(w.pool, common.seed, common.threads);
    }
    RandomStream rng = RandomStream(common.seed).Derive("sample/episodes");
    std::ostringstream lines;
    for (int b = 0; b < count; ++b) {
      const auto tasks = s.NextMetaBatch();
      for (const Task& t : tasks) {
        const Episode ep = DrawEpisode(t, w.pool, shots, queries, rng);
        json j;
        j["task_id"] = t.task_id;
        j["classes"] = json::array();
        for (ClassId c : t.classes) j["classes"].push_back(w.table.label(c));
        auto dump = [](const std::vector<LabeledExample>& xs) {
          json a = json::array();
          for (const auto& e : xs) a.push_back({{"x", e.x}, {"y", e.label}});
          return a;
        };
        j["support"] = dump(ep.support);
        j["query"] = dump(ep.query);
        lines << j.dump() << "\n";
        if (difficulty) s.ReportDifficulty(t, difficulty(t));
      }
    }
    if (out_file.empty()) {
      out << lines.str();
      return 0;
    }
    const fs::path path(out_file);
    const fs::path dir = PrepareDir(path.parent_path().string());
    WriteFile(path, lines.str());
    WriteManifest(dir, sub, common, {path.filename().string()}, {}, start);
    return 0;
  }
};

// Options shared by the two training commands.
struct TrainArgs {
  std::string sampler_kind = "uniform";
  SamplerArgs sampler;
  std::optional<int> epochs, batches_per_epoch, inner_steps, shots, queries,
      eval_pool_size;
  std::optional<double> inner_lr, meta_lr;
  std::optional<std::uint64_t> eval_seed;
  std::string out_dir = ".";
  std::map<std::string, std::string> resolved;

  void Register(CLI::App* sub, bool with_inner) {
    AddSampler(sub, sampler);
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--batches-per-epoch", batches_per_epoch,
                    "Meta-batches per epoch");
    if (with_inner) {
      sub->add_option("--inner-steps", inner_steps, "Adaptation steps");
      sub->add_option("--inner-lr", inner_lr, "Adaptation step size");
    }
    sub->add_option("--meta-lr", meta_lr, "Outer learning rate");
    sub->add_option("--shots", shots, "Support examples per task (per class)");
    sub->add_option("--queries", queries, "Query examples per task (per class)");
    sub->add_option("--eval-pool-size", eval_pool_size, "Held-out tasks");
    sub->add_option("--eval-seed", eval_seed,
                    "Seed of the held-out pool (default: --seed)");
    sub->add_option("--out-dir", out_dir, "Output directory")
        ->capture_default_str();
  }

  template <typename T>
  void Fill(const std::optional<T>& given, T& field, const char* name) {
    if (given) field = *given;
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << FormatDouble(field);
    } else {
      s << field;
    }
    resolved[name] = s.str();
  }

  void Apply(TrainConfig& c, const Common& common, bool with_inner) {
    c.seed = common.seed;
    c.threads = common.threads;
    c.sampler = sampler.Resolve(common.seed);
    Fill(epochs, c.epochs, "epochs");
    Fill(batches_per_epoch, c.batches_per_epoch, "batches-per-epoch");
    if (with_inner) {
      Fill(inner_steps, c.inner_steps, "inner-steps");
      Fill(inner_lr, c.inner_lr, "inner-lr");
    }
    Fill(meta_lr, c.meta_lr, "meta-lr");
    Fill(shots, c.k_shot, "shots");
    Fill(queries, c.q_queries, "queries");
    Fill(eval_pool_size, c.eval_pool_size, "eval-pool-size");
    c.eval_seed = common.seed;
    Fill(eval_seed, c.eval_seed, "eval-seed");
    c.Validate();
  }

  void Write(const CLI::App& sub, const Common& common, const RunResult& r,
             std::chrono::system_clock::time_point start, std::ostream& out) {
    const fs::path dir = PrepareDir(out_dir);
    std::string log;
    for (const auto& l : r.log) log += l + "\n";
    const std::string summary = SummaryLine(r.summary);
    WriteFile(dir / "curve.csv", CurveCsv(r.curve));
    WriteFile(dir / "per_task.csv", PerTaskCsv(r.per_task));
    WriteFile(dir / "summary.txt", summary + "\n");
    WriteFile(dir / "log.txt", log);
    WriteManifest(dir, sub, common,
                  {"curve.csv", "per_task.csv", "summary.txt", "log.txt"},
                  resolved, start);
    out << log << summary << "\n";
  }
};

struct TrainRegressionCmd {
  Common common;
  std::string learner = "maml-fo";
  std::string family = "sinusoid";
  TrainArgs train;

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    sub->add_option("--learner", learner, "maml, maml-fo or reptile")
        ->capture_default_str();
    sub->add_option("--family", family, "sinusoid, sinusoid-line or harmonic")
        ->capture_default_str();
    train.Register(sub, /*with_inner=*/true);
  }

  int Run(const CLI::App& sub, std::ostream& out) {
    const auto start = std::chrono::system_clock::now();
    const Learner l = ParseLearner(learner);
    if (l == Learner::kProtonet) {
      throw UsageError("--learner must be maml, maml-fo or reptile");
    }
    TrainConfig c = TrainConfig::Defaults(l);
    c.family = ParseRegressionFamily(family);
    train.Apply(c, common, /*with_inner=*/true);
    const RunResult r = RunRegressionExperiment(c);
    train.Write(sub, common, r, start, out);
    return 0;
  }
};

struct TrainProtonetCmd {
  Common common;
  WorldArgs world;
  int test_classes = 10;
  int ddpp_refresh = 50;
  int embedding_samples = 10;
  double init_scale = 0.1;
  TrainArgs train;

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    AddWorld(sub, world);
    sub->add_option("--test-classes", test_classes,
                    "Classes held out for evaluation")
        ->capture_default_str();
    sub->add_option("--ddpp-refresh", ddpp_refresh,
                    "Meta-batches between ddpp embedding refreshes")
        ->capture_default_str();
    sub->add_option("--embedding-samples", embedding_samples,
                    "Examples averaged per class embedding")
        ->capture_default_str();
    sub->add_option("--init-scale", init_scale,
                    "Std-dev of the perturbation of the initial embedding")
        ->capture_default_str();
    train.Register(sub, /*with_inner=*/false);
  }

  int Run(const CLI::App& sub, std::ostream& out) {
    const auto start = std::chrono::system_clock::now();
    const SyntheticWorld w = LoadWorld(world, common.seed);
    if (test_classes < 1 || static_cast<std::size_t>(test_classes) >= w.pool.size()) {
      throw UsageError("--test-classes must leave at least one training class");
    }
    TrainConfig c = TrainConfig::Defaults(Learner::kProtonet);
    c.ddpp_refresh_interval = ddpp_refresh;
    c.embedding_samples = embedding_samples;
    c.init_scale = init_scale;
    train.Apply(c, common, /*with_inner=*/false);
    const TrainTestPools pools =
        SplitPool(w.pool, static_cast<std::size_t>(test_classes));
    const RunResult r = RunProtonetExperiment(
        c, pools.train, pools.test, std::make_shared<const EmbeddingTable>(w.table));
    train.Write(sub, common, r, start, out);
    return 0;
  }
};

struct DppCheckCmd {
  Common common;
  std::string kernel = "identity";
  std::string embeddings;
  int n = 4;
  int k = 2;
  int dim = 4;
  std::uint64_t draws = 60000;
  double alpha = 0.01;
  std::string out_dir;

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    sub->add_option("--kernel", kernel, "identity or random (Gaussian features)")
        ->capture_default_str();
    sub->add_option("--embeddings", embeddings,
                    "Embedding CSV; its rows form the ground set");
    sub->add_option("--n", n, "Ground set size (<= 8)")->capture_default_str();
    sub->add_option("--k", k, "Subset size (<= 3)")->capture_default_str();
    sub->add_option("--dim", dim, "Feature dimension for --kernel random")
        ->capture_default_str();
    sub->add_option("--draws", draws, "Samples drawn")->capture_default_str();
    sub->add_option("--alpha", alpha, "Pass when p > alpha")->capture_default_str();
    sub->add_option("--out-dir", out_dir, "Also write dpp_check.csv here");
  }

  int Run(const CLI::App& sub, std::ostream& out) {
    const auto start = std::chrono::system_clock::now();
    std::optional<LEnsemble> ens;
    std::optional<EmbeddingTable> table;
    if (!embeddings.empty()) {
      table = ReadEmbeddingsCsv(embeddings);
      const auto ids = table->ids();
      n = static_cast<int>(ids.size());
      if (n > 8) throw UsageError("embedding file has more than 8 rows");
      ens = LEnsemble::FromEmbeddings(*table, ids);
    } else {
      if (n < 1 || n > 8) throw UsageError("--n must be in [1, 8]");
      if (kernel == "identity") {
        std::vector<double> l(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i) l[static_cast<std::size_t>(i * n + i)] = 1.0;
        ens = LEnsemble::FromKernel(std::move(l), static_cast<std::size_t>(n));
      } else if (kernel == "random") {
        if (dim < 1) throw UsageError("--dim must be >= 1");
        RandomStream rng = RandomStream(common.seed).Derive("dpp-check/features");
        EmbeddingTable t(static_cast<std::size_t>(dim));
        for (int i = 0; i < n; ++i) {
          Vector v(static_cast<std::size_t>(dim));
          for (double& x : v) x = rng.Normal();
          t.Add(std::to_string(i), std::move(v));
        }
        ens = LEnsemble::FromEmbeddings(t, t.ids());
        table = std::move(t);
      } else {
        throw UsageError("--kernel must be identity or random");
      }
    }
    if (k < 1 || k > 3) throw UsageError("--k must be in [1, 3]");
    if (draws < 1) throw UsageError("--draws must be >= 1");
    RandomStream rng = RandomStream(common.seed).Derive("dpp-check/draws");
    const LEnsemble& e = *ens;
    const int kk = k;
    const GoodnessOfFit fit = KdppGoodnessOfFit(
        e, k, draws, [&e, kk](RandomStream& r) { return KdppSample(e, kk, r); },
        rng, alpha);
    std::ostringstream line;
    line << "chi_square=" << FormatDouble(fit.chi_square) << " dof=" << fit.dof
         << " p_value=" << FormatDouble(fit.p_value) << " draws=" << fit.draws
         << " impossible_hits=" << fit.impossible_hits
         << " result=" << (fit.passed ? "pass" : "fail") << "\n";
    out << line.str();
    if (!out_dir.empty()) {
      std::string csv = "subset,expected_probability,observed\n";
      for (std::size_t i = 0; i < fit.expected.size(); ++i) {
        std::vector<std::string> names;
        for (std::size_t pos : fit.expected[i].positions) {
          const ClassId id = e.item_ids()[pos];
          names.push_back(table ? table->label(id) : std::to_string(id));
        }
        csv += Join(names, "|") + "," +
               FormatDouble(fit.expected[i].probability) + "," +
               std::to_string(fit.observed[i]) + "\n";
      }
      const fs::path dir = PrepareDir(out_dir);
      WriteFile(dir / "dpp_check.csv", csv);
      WriteFile(dir / "dpp_check.txt", line.str());
      WriteManifest(dir, sub, common, {"dpp_check.csv", "dpp_check.txt"}, {},
                    start);
    }
    return 0;
  }
};

struct TtestCmd {
  Common common;
  std::string a, b;
  double alpha = 0.05;

  void Register(CLI::App* sub) {
    AddCommon(sub, common);
    sub->add_option("a", a, "Per-task CSV of the first run")->required();
    sub->add_option("b", b, "Per-task CSV of the second run")->required();
    sub->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  }

  int Run(const CLI::App&, std::ostream& out) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
    const auto xs = ReadPerTaskCsv(a);
    const auto ys = ReadPerTaskCsv(b);
    const TTestResult r = PairedTTest(xs, ys);
    out << "t,p,dof,significant@" << FormatDouble(alpha) << "\n"
        << FormatDouble(r.t) << "," << FormatDouble(r.p) << "," << r.dof << ","
        << (r.Significant(alpha) ? "true" : "false") << "\n";
    return 0;
  }
};

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Episodic task samplers, diversity and meta-learning runs",
               "episode_forge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "Read flags from a key=value file such as a run manifest");
  app.set_version_flag("--version", kVersion);

  DiversityCmd diversity;
  SampleCmd sample;
  TrainRegressionCmd train_regression;
  TrainProtonetCmd train_protonet;
  DppCheckCmd dpp_check;
  TtestCmd ttest;

  struct Entry {
    CLI::App* sub;
    std::function<int(const CLI::App&, std::ostream&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.Register(sub);
    entries.push_back({sub, [&cmd](const CLI::App& s, std::ostream& o) {
                         return cmd.Run(s, o);
                       }});
  };
  add("diversity", "Overall diversity of task samplers", diversity);
  add("sample", "Stream sampled episodes as JSON Lines", sample);
  add("train-regression", "Meta-train an MLP on a regression family",
      train_regression);
  add("train-protonet", "Train a linear Protonet on a synthetic world",
      train_protonet);
  add("dpp-check", "Chi-square check of the k-DPP sampler", dpp_check);
  add("ttest", "Paired t-test of two per-task CSVs", ttest);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(),
                                args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    for (const Entry& e : entries) {
      if (e.sub->parsed()) {
        out << e.sub->help();
        return 0;
      }
    }
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: usage: " << msg << "\n";
    return 2;
  }

  try {
    for (const Entry& e : entries) {
      if (e.sub->parsed()) return e.run(*e.sub, out);
    }
    err << "error: usage: no command given\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << ErrorCodeName(e.code()) << ": " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace episode_forge::cli
