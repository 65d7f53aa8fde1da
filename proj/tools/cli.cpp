#include "cli.hpp"

#include "glru/bounds.hpp"
#include "glru/erm.hpp"
#include "glru/error.hpp"
#include "glru/gapfast.hpp"
#include "glru/synth.hpp"
#include "glru/workflows.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/sha.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace glru::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr const char *kVersion = "1.0.0";

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(error_code::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(error_code::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw error(error_code::io, "failed writing '" + path + "'");
}

struct model_opts {
  std::string loss = "logistic";
  double gamma = 1.0;
  std::string reg = "l2";
  double lambda = 1.0;
  double kappa = 0.0;
  bool intercept = false;
  std::string normalize = "none";
  double tol = 1e-6;
  int max_iter = 300;
};

void add_model_options(CLI::App *app, model_opts &o) {
  app->add_option("--loss", o.loss, "squared | huber | squared-hinge | smoothed-hinge | logistic")
      ->capture_default_str();
  app->add_option("--gamma", o.gamma, "huber / smoothed-hinge parameter")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--reg", o.reg, "l2 | elastic-net | l1")->capture_default_str();
  app->add_option("--lambda", o.lambda, "regularization strength")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--kappa", o.kappa, "elastic-net l1 weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_flag("--intercept", o.intercept, "append an unregularized intercept column");
  app->add_option("--normalize", o.normalize, "dense | sparse | none")
      ->check(CLI::IsMember({"dense", "sparse", "none"}))
      ->capture_default_str();
  app->add_option("--tol", o.tol, "relative duality gap tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--max-iter", o.max_iter, "solver iteration limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

json model_opts_json(const model_opts &o) {
  return json{{"loss", o.loss},           {"gamma", o.gamma},         {"reg", o.reg},
              {"lambda", o.lambda},       {"kappa", o.kappa},         {"intercept", o.intercept},
              {"normalize", o.normalize}, {"tol", o.tol},             {"max_iter", o.max_iter}};
}

model_opts model_opts_from_json(const json &j) {
  model_opts o;
  o.loss = j.at("loss").get<std::string>();
  o.gamma = j.at("gamma").get<double>();
  o.reg = j.at("reg").get<std::string>();
  o.lambda = j.at("lambda").get<double>();
  o.kappa = j.at("kappa").get<double>();
  o.intercept = j.at("intercept").get<bool>();
  o.normalize = j.at("normalize").get<std::string>();
  o.tol = j.at("tol").get<double>();
  o.max_iter = j.at("max_iter").get<int>();
  return o;
}

dataset preprocess(dataset ds, const model_opts &o) {
  ds = normalize(ds, parse_normalization(o.normalize));
  if (o.intercept) ds = ds.with_intercept_column();
  return ds;
}

objective make_objective(const model_opts &o, index_t d) {
  std::optional<index_t> free;
  if (o.intercept) free = d - 1;
  return objective{loss::parse(o.loss, o.gamma), regularizer::parse(o.reg, o.lambda, o.kappa, free)};
}

train_config make_train_config(const model_opts &o) {
  train_config c;
  c.rel_gap_tol = o.tol;
  c.max_iter = o.max_iter;
  return c;
}

task task_for(const model_opts &o) {
  return loss::parse(o.loss, o.gamma).for_classification() ? task::classification
                                                           : task::regression;
}

struct loaded {
  dataset data;
  std::string path;
  std::string hash;
};

loaded load(const std::string &path, task kind, const model_opts &o) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  return {preprocess(parse_libsvm(in, kind), o), path, content_hash(bytes)};
}

json vec_json(const vector_t &v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

vector_t json_vec(const json &j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const vector_t>(v.data(), static_cast<index_t>(v.size()));
}

json interval_json(const interval &b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }

json provenance(const std::vector<const loaded *> &data, json config) {
  json ds = json::array();
  for (const loaded *l : data) ds.push_back({{"path", l->path}, {"hash", l->hash}});
  return json{{"tool", "glru"}, {"version", kVersion}, {"data", ds}, {"config", std::move(config)}};
}

void emit(const json &j, const std::string &path, std::ostream &out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") out << text;
  else write_file(path, text);
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Parses "a..b" or "b" (meaning 1..b) into the upper bound b.
int parse_mods(const std::string &s) {
  const auto dots = s.find("..");
  const std::string hi = dots == std::string::npos ? s : s.substr(dots + 2);
  try {
    std::size_t used = 0;
    const int v = std::stoi(hi, &used);
    if (used != hi.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw validation_error("cannot parse modification range '" + s + "'");
  }
}

// ---------------------------------------------------------------------------

struct train_cmd {
  model_opts o;
  std::string data, out;
};

int do_train(const train_cmd &c, std::ostream &out) {
  const loaded l = load(c.data, task_for(c.o), c.o);
  const objective obj = make_objective(c.o, l.data.d());
  const trained_model m = train(l.data, obj, make_train_config(c.o));
  json j{{"format", "glru-model"},
         {"version", 1},
         {"data", {{"path", l.path}, {"hash", l.hash}, {"n", l.data.n()}, {"d", l.data.d()}}},
         {"config", model_opts_json(c.o)},
         {"w", vec_json(m.w)},
         {"alpha", vec_json(m.alpha)},
         {"cache",
          {{"loss_sum", m.cache.loss_sum},
           {"reg_sum", m.cache.reg_sum},
           {"loss_conj_sum", m.cache.loss_conj_sum},
           {"reg_conj_sum", m.cache.reg_conj_sum},
           {"xt_alpha_sqnorm", m.cache.xt_alpha_sqnorm},
           {"primal", m.cache.primal()},
           {"dual", m.cache.dual()}}},
         {"relative_gap", m.relative_gap},
         {"iterations", m.iterations}};
  emit(j, c.out, out);
  return 0;
}

struct gap_cmd {
  std::string model, data;
  std::vector<index_t> remove_instances, remove_features;
  std::string add_instances, add_features;
};

int do_gap(const gap_cmd &c, std::ostream &out) {
  json mj;
  try {
    mj = json::parse(read_file(c.model));
  } catch (const json::exception &e) {
    throw validation_error("model file '" + c.model + "' is not valid JSON: " + e.what());
  }
  if (mj.value("format", "") != "glru-model") throw validation_error("not a glru model file");
  const model_opts o = model_opts_from_json(mj.at("config"));
  const std::string path = c.data.empty() ? mj.at("data").at("path").get<std::string>() : c.data;
  const loaded l = load(path, task_for(o), o);
  if (l.hash != mj.at("data").at("hash").get<std::string>())
    throw validation_error("data '" + path + "' does not match the hash stored in the model");
  const objective obj = make_objective(o, l.data.d());

  trained_model m;
  m.w = json_vec(mj.at("w"));
  m.alpha = json_vec(mj.at("alpha"));
  if (m.w.size() != l.data.d() || m.alpha.size() != l.data.n())
    throw validation_error("model dimensions do not match the data");
  m.cache = build_cache(l.data, obj, m.w, m.alpha);

  const int chosen = int(!c.remove_instances.empty()) + int(!c.remove_features.empty()) +
                     int(!c.add_instances.empty()) + int(!c.add_features.empty());
  if (chosen != 1)
    throw error(error_code::usage, "choose exactly one of --remove-instance, --remove-feature, "
                                   "--add-instances, --add-features");
  gap_certificate cert;
  if (!c.remove_instances.empty()) {
    cert = gap_instance_removal(m, l.data, obj, c.remove_instances, nullptr, false).cert;
  } else if (!c.remove_features.empty()) {
    cert = gap_feature_removal(m, l.data, obj, c.remove_features, nullptr, false).cert;
  } else if (!c.add_instances.empty()) {
    model_opts raw = o;
    raw.intercept = false;
    dataset extra = load(c.add_instances, task_for(o), raw).data;
    if (o.intercept) extra = extra.with_intercept_column();
    if (extra.d() != l.data.d()) {
      // Trailing all-zero features are absent from LIBSVM rows; pad them.
      if (extra.d() > l.data.d()) throw validation_error("added rows are wider than the data");
      row_matrix r = extra.rows();
      r.conservativeResize(extra.n(), l.data.d());
      extra = dataset(r, extra.y(), extra.kind());
    }
    cert = gap_instance_addition(m, l.data, obj, extra.rows(), extra.y(), nullptr, false).cert;
  } else {
    model_opts raw = o;
    raw.intercept = false;
    const dataset extra = load(c.add_features, task::regression, raw).data;
    cert = gap_feature_addition(m, l.data, obj, extra.cols(), nullptr, false).cert;
  }
  json j{{"gap", cert.gap},        {"n_new", cert.n_new}, {"lambda", cert.lambda},
         {"mu", cert.mu},          {"source", cert.source}};
  j["r_p"] = cert.lambda > 0.0 ? json(radius_primal(cert)) : json(nullptr);
  j["r_d"] = cert.mu > 0.0 ? json(radius_dual(cert)) : json(nullptr);
  j["data_hash"] = l.hash;
  out << j.dump(2) << "\n";
  return 0;
}

struct loocv_cmd {
  model_opts o;
  std::string data, report, bound = "primal-scb";
  bool glru = false, approx = false, early_stop = false, no_tighten = false, no_warm = false;
  unsigned threads = default_threads();
};

json loocv_json(const loocv_report &r, const loaded &l, const loocv_cmd &c) {
  json folds = json::array();
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto &f = r.folds[i];
    folds.push_back({{"index", i},
                     {"status", to_string(f.status)},
                     {"bound", interval_json(f.bound)},
                     {"predicted", static_cast<int>(f.predicted)},
                     {"iterations", f.iterations},
                     {"early_stopped", f.early_stopped},
                     {"train_seconds", f.train_seconds}});
  }
  json cfg = model_opts_json(c.o);
  cfg["method"] = r.method;
  cfg["bound"] = c.bound;
  cfg["early_stop"] = c.early_stop;
  cfg["tighten"] = !c.no_tighten;
  cfg["warm_start"] = !c.no_warm;
  return json{{"report", "loocv"},
              {"n", l.data.n()},
              {"d", l.data.d()},
              {"method", r.method},
              {"error_count", r.error_count},
              {"trainings_performed", r.trainings_performed},
              {"timing", {{"gap_seconds_total", r.gap_seconds_total}, {"total_seconds", r.total_seconds}}},
              {"folds", folds},
              {"provenance", provenance({&l}, cfg)}};
}

int do_loocv(const loocv_cmd &c, std::ostream &out) {
  if (c.glru && c.approx) throw error(error_code::usage, "--glru and --approx are exclusive");
  const loaded l = load(c.data, task::classification, c.o);
  const objective obj = make_objective(c.o, l.data.d());
  loocv_config cfg;
  cfg.train = make_train_config(c.o);
  cfg.bound = parse_bound_kind(c.bound);
  cfg.early_stop = c.early_stop;
  cfg.tighten = !c.no_tighten;
  cfg.warm_start = !c.no_warm;
  cfg.threads = c.threads;
  loocv_report r;
  if (c.glru) r = loocv_glru(l.data, obj, cfg);
  else if (c.approx) r = loocv_approx(l.data, obj, cfg);
  else r = loocv_naive(l.data, obj, cfg);
  emit(loocv_json(r, l, c), c.report, out);
  if (!c.report.empty() && c.report != "-")
    out << "error_count " << r.error_count << " trainings " << r.trainings_performed << "\n";
  return 0;
}

struct stepwise_cmd {
  model_opts o;
  std::string train, valid, report, bound = "primal-scb";
  bool glru = false, no_tighten = false;
  int max_steps = -1;
  unsigned threads = default_threads();
};

int do_stepwise(const stepwise_cmd &c, std::ostream &out) {
  model_opts raw = c.o;
  raw.normalize = "none";
  raw.intercept = false;
  loaded tr = load(c.train, task::classification, raw);
  loaded va = load(c.valid, task::classification, raw);
  // LIBSVM files may omit trailing all-zero features; align the widths.
  const index_t d = std::max(tr.data.d(), va.data.d());
  auto widen = [d](const dataset &ds) {
    row_matrix r = ds.rows();
    r.conservativeResize(ds.n(), d);
    return dataset(r, ds.y(), ds.kind());
  };
  tr.data = widen(tr.data);
  va.data = widen(va.data);
  // Normalize with statistics of the pooled data so both parts share a scale.
  if (c.o.normalize != "none") {
    const dataset pooled = normalize(tr.data.with_instances(va.data.rows(), va.data.y()),
                                     parse_normalization(c.o.normalize));
    std::vector<index_t> a(static_cast<std::size_t>(tr.data.n())), b(static_cast<std::size_t>(va.data.n()));
    std::iota(a.begin(), a.end(), index_t{0});
    std::iota(b.begin(), b.end(), tr.data.n());
    tr.data = pooled.select_instances(a);
    va.data = pooled.select_instances(b);
  }
  if (c.o.intercept) {
    tr.data = tr.data.with_intercept_column();
    va.data = va.data.with_intercept_column();
  }
  const objective obj = make_objective(c.o, tr.data.d());
  stepwise_config cfg;
  cfg.train = make_train_config(c.o);
  cfg.bound = parse_bound_kind(c.bound);
  cfg.tighten = !c.no_tighten;
  cfg.threads = c.threads;
  cfg.max_steps = c.max_steps;
  const stepwise_report r =
      c.glru ? stepwise_glru(tr.data, va.data, obj, cfg) : stepwise_naive(tr.data, va.data, obj, cfg);

  json steps = json::array();
  for (const auto &s : r.steps) {
    json cands = json::array();
    for (const auto &k : s.candidates) {
      json cj{{"feature", k.feature}, {"trained", k.trained}};
      cj["error"] = k.error >= 0 ? json(k.error) : json(nullptr);
      if (k.correct >= 0) {
        cj["correct"] = k.correct;
        cj["incorrect"] = k.incorrect;
        cj["undetermined"] = k.undetermined;
      }
      cands.push_back(cj);
    }
    json sj{{"candidates_screened", s.candidates_screened},
            {"candidates_trained", s.candidates_trained},
            {"e_null", s.e_null},
            {"e_best", s.e_best},
            {"candidates", cands}};
    sj["removed"] = s.removed ? json(*s.removed) : json(nullptr);
    steps.push_back(sj);
  }
  json cfgj = model_opts_json(c.o);
  cfgj["method"] = r.method;
  cfgj["bound"] = c.bound;
  cfgj["tighten"] = !c.no_tighten;
  cfgj["max_steps"] = c.max_steps;
  json j{{"report", "stepwise"},
         {"method", r.method},
         {"selected", r.removed_order},
         {"final_set", r.final_set},
         {"trainings_performed", r.trainings_performed},
         {"timing", {{"total_seconds", r.total_seconds}}},
         {"steps", steps},
         {"provenance", provenance({&tr, &va}, cfgj)}};
  emit(j, c.report, out);
  if (!c.report.empty() && c.report != "-")
    out << "final_set_size " << r.final_set.size() << " trainings " << r.trainings_performed << "\n";
  return 0;
}

struct tightness_cmd {
  model_opts o;
  std::string data, out, mods = "1..10", lambdas = "1,0.125,0.015625";
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  bool no_tighten = false;
};

int do_tightness(const tightness_cmd &c, std::ostream &out) {
  const loaded l = load(c.data, task::classification, c.o);
  const objective obj = make_objective(c.o, l.data.d());
  tightness_config cfg;
  cfg.max_mods = parse_mods(c.mods);
  cfg.lambdas.clear();
  std::stringstream ss(c.lambdas);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !(v > 0.0)) throw std::invalid_argument(tok);
      cfg.lambdas.push_back(v);
    } catch (const std::exception &) {
      throw validation_error("cannot parse lambda '" + tok + "'");
    }
  }
  if (cfg.lambdas.empty()) throw validation_error("--lambdas is empty");
  cfg.test_fraction = c.test_fraction;
  cfg.seed = c.seed;
  cfg.tighten = !c.no_tighten;
  cfg.train = make_train_config(c.o);
  const tightness_report r = tightness_study(l.data, obj, cfg);
  std::ostringstream csv;
  write_tightness_csv(csv, r);
  if (c.out.empty() || c.out == "-") out << csv.str();
  else write_file(c.out, csv.str());
  return 0;
}

struct synth_cmd {
  std::uint64_t seed = 0;
  long long n = 100, d = 10;
  double sparsity = 0.0, separation = 2.0;
  std::string out;
};

int do_synth(const synth_cmd &c, std::ostream &out) {
  const dataset ds = synth_dataset(c.seed, c.n, c.d, c.sparsity, c.separation);
  const std::string text = to_libsvm_string(ds);
  if (c.out.empty() || c.out == "-") {
    out << text;
  } else {
    write_file(c.out, text);
    out << content_hash(text) << "\n";
  }
  return 0;
}

}  // namespace

std::string content_hash(const std::string &bytes) {
  const std::string blob = "blob " + std::to_string(bytes.size()) + '\0' + bytes;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char *>(blob.data()), blob.size(), md);
  static const char *hex = "0123456789abcdef";
  std::string outs;
  for (unsigned char b : md) {
    outs += hex[b >> 4];
    outs += hex[b & 15];
  }
  return outs;
}

std::string file_hash(const std::string &path) { return content_hash(read_file(path)); }

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Certified bounds for retrained linear models after small data changes", "glru"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  train_cmd tc;
  auto *train_app = app.add_subcommand("train", "train a model and write it as JSON");
  add_model_options(train_app, tc.o);
  train_app->add_option("--data", tc.data, "LIBSVM file")->required();
  train_app->add_option("--out", tc.out, "model JSON path (default stdout)");

  gap_cmd gc;
  auto *gap_app = app.add_subcommand("gap", "duality gap certificate for a modification");
  gap_app->add_option("--model", gc.model, "model JSON from `glru train`")->required();
  gap_app->add_option("--data", gc.data, "data file (default: path stored in the model)");
  gap_app->add_option("--remove-instance", gc.remove_instances, "0-based instance index (repeatable)")
      ->delimiter(',');
  gap_app->add_option("--remove-feature", gc.remove_features, "0-based feature index (repeatable)")
      ->delimiter(',');
  gap_app->add_option("--add-instances", gc.add_instances, "LIBSVM file of rows to add");
  gap_app->add_option("--add-features", gc.add_features,
                      "LIBSVM file whose columns are the features to add (labels ignored)");

  loocv_cmd lc;
  auto *loocv_app = app.add_subcommand("loocv", "leave-one-out cross-validation");
  add_model_options(loocv_app, lc.o);
  loocv_app->add_option("--data", lc.data, "LIBSVM file")->required();
  loocv_app->add_flag("--glru", lc.glru, "screen folds with certified bounds");
  loocv_app->add_flag("--approx", lc.approx, "one-step Newton approximation");
  loocv_app->add_option("--bound", lc.bound, "primal-scb | dual-scb")
      ->check(CLI::IsMember({"primal-scb", "dual-scb"}))
      ->capture_default_str();
  loocv_app->add_flag("--early-stop", lc.early_stop, "stop fold training once the label is certified");
  loocv_app->add_flag("--no-tighten", lc.no_tighten, "use the plain dual ball for dual-scb");
  loocv_app->add_flag("--no-warm-start", lc.no_warm, "train folds from zero");
  loocv_app->add_option("--threads", lc.threads, "worker threads")->check(CLI::PositiveNumber);
  loocv_app->add_option("--report", lc.report, "report JSON path (default stdout)");

  stepwise_cmd sc;
  auto *step_app = app.add_subcommand("stepwise", "backward stepwise feature elimination");
  add_model_options(step_app, sc.o);
  step_app->add_option("--train", sc.train, "training LIBSVM file")->required();
  step_app->add_option("--valid", sc.valid, "validation LIBSVM file")->required();
  step_app->add_flag("--glru", sc.glru, "screen candidates with certified bounds");
  step_app->add_option("--bound", sc.bound, "primal-scb | dual-scb")
      ->check(CLI::IsMember({"primal-scb", "dual-scb"}))
      ->capture_default_str();
  step_app->add_flag("--no-tighten", sc.no_tighten, "use the plain dual ball for dual-scb");
  step_app->add_option("--max-steps", sc.max_steps, "stop after this many removals (-1: no limit)");
  step_app->add_option("--threads", sc.threads, "worker threads")->check(CLI::PositiveNumber);
  step_app->add_option("--report", sc.report, "report JSON path (default stdout)");

  tightness_cmd kc;
  auto *tight_app = app.add_subcommand("tightness", "label determination rates of the bounds");
  add_model_options(tight_app, kc.o);
  tight_app->add_option("--data", kc.data, "LIBSVM file")->required();
  tight_app->add_option("--mods", kc.mods, "modification counts, e.g. 1..10")->capture_default_str();
  tight_app->add_option("--lambdas", kc.lambdas, "comma-separated lambda grid")->capture_default_str();
  tight_app->add_option("--test-fraction", kc.test_fraction, "held-out test share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  tight_app->add_option("--seed", kc.seed, "split seed")->capture_default_str();
  tight_app->add_flag("--no-tighten", kc.no_tighten, "use the plain dual ball for dual-scb");
  tight_app->add_option("--out", kc.out, "CSV path (default stdout)");

  synth_cmd yc;
  auto *synth_app = app.add_subcommand("synth", "write a seeded synthetic dataset");
  synth_app->add_option("--seed", yc.seed, "random seed")->capture_default_str();
  synth_app->add_option("--n", yc.n, "instances")->check(CLI::PositiveNumber)->capture_default_str();
  synth_app->add_option("--d", yc.d, "features")->check(CLI::PositiveNumber)->capture_default_str();
  synth_app->add_option("--sparsity", yc.sparsity, "share of zeroed entries")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  synth_app->add_option("--separation", yc.separation, "distance between class means")
      ->capture_default_str();
  synth_app->add_option("--out", yc.out, "LIBSVM path (default stdout)");

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return static_cast<int>(error_code::usage);
  }

  try {
    if (*train_app) return do_train(tc, out);
    if (*gap_app) return do_gap(gc, out);
    if (*loocv_app) return do_loocv(lc, out);
    if (*step_app) return do_stepwise(sc, out);
    if (*tight_app) return do_tightness(kc, out);
    if (*synth_app) return do_synth(yc, out);
  } catch (const error &e) {
    err << "glru: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const json::exception &e) {
    err << "glru: malformed model file: " << e.what() << "\n";
    return static_cast<int>(error_code::validation);
  } catch (const std::exception &e) {
    err << "glru: internal error: " << e.what() << "\n";
    return static_cast<int>(error_code::internal);
  }
  return static_cast<int>(error_code::usage);
}

int run(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace glru::cli
