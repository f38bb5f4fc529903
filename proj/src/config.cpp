#include "msid/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace msid {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

long long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15)
      return static_cast<long long>(v);
  }
  throw ConfigError(path, "expected an integer");
}

Vec as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = as_number(j[i], index_path(path, i));
  return v;
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long long v = as_integer(j[i], index_path(path, i));
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(index_path(path, i), "out of range");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Object reader that remembers which keys were consumed so that leftovers
// can be reported as unknown fields.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return join(path_, key); }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(field(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  Reader object(const std::string& key) { return Reader(raw(key), field(key)); }

  double number(const std::string& key) { return as_number(raw(key), field(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(field(key), "must be positive");
    return v;
  }
  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v < 0.0) throw ConfigError(field(key), "must be non-negative");
    return v;
  }
  int required_int(const std::string& key, int lo = INT32_MIN, int hi = INT32_MAX) {
    const long long v = as_integer(raw(key), field(key));
    if (v < lo) throw ConfigError(field(key), "must be >= " + std::to_string(lo));
    if (v > hi) throw ConfigError(field(key), "must be <= " + std::to_string(hi));
    return static_cast<int>(v);
  }
  int integer(const std::string& key, int fallback, int lo, int hi = INT32_MAX) {
    return has(key) ? required_int(key, lo, hi) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& j = raw(key);
    if (!j.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return j.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& j = raw(key);
    if (!j.is_string()) throw ConfigError(field(key), "expected a string");
    return j.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) {
    const std::string v = string(key, fallback);
    for (const auto& a : allowed)
      if (v == a) return v;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(field(key), "'" + v + "' is not one of: " + list);
  }
  Vec vector(const std::string& key) { return as_vector(raw(key), field(key)); }
  std::vector<int> int_list(const std::string& key) { return as_int_list(raw(key), field(key)); }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

char scenario_letter(Reader& r, const std::string& key) {
  const std::string s = r.choice(key, "a", {"a", "b", "c"});
  return s[0];
}

GeneratorSpec read_generator(Reader& r) {
  const std::string kind =
      r.choice("generator", "", {"logistic", "pendulum", "linear2nd", "farina"});
  if (kind == "logistic") {
    LogisticSpec s;
    s.theta = r.number("theta", s.theta);
    s.x0 = r.number("x0", s.x0);
    s.n = r.integer("n", s.n, 0);
    s.noise = r.non_negative("noise", s.noise);
    return s;
  }
  if (kind == "pendulum") {
    PendulumSpec s;
    s.scenario = scenario_letter(r, "scenario");
    s.n = r.integer("n", s.n, 0);
    if (r.has("input_std")) s.input_std = r.non_negative("input_std", 0.0);
    if (r.has("noise")) s.noise = r.non_negative("noise", 0.0);
    s.reference_std = r.non_negative("reference_std", s.reference_std);
    s.controller_gain = r.number("controller_gain", s.controller_gain);
    s.hold = r.integer("hold", s.hold, 1);
    return s;
  }
  if (kind == "linear2nd") {
    Linear2ndSpec s;
    s.setting = scenario_letter(r, "setting");
    s.n = r.integer("n", s.n, 0);
    s.noise = r.non_negative("noise", s.noise);
    s.input_std = r.non_negative("input_std", s.input_std);
    s.hold = r.integer("hold", s.hold, 1);
    return s;
  }
  FarinaSpec s;
  s.theta1 = r.number("theta1", s.theta1);
  s.theta2 = r.number("theta2", s.theta2);
  s.n = r.integer("n", s.n, 0);
  s.noise = r.non_negative("noise", s.noise);
  s.ar = r.number("ar", s.ar);
  if (!(std::abs(s.ar) < 1.0)) throw ConfigError(r.field("ar"), "must satisfy |ar| < 1");
  s.eta_scale = r.non_negative("eta_scale", s.eta_scale);
  return s;
}

DataSource read_data(Reader r, const std::filesystem::path& base_dir) {
  DataSource out;
  if (r.has("csv")) {
    if (r.has("generator")) throw ConfigError(r.field("csv"), "give either csv or generator");
    std::filesystem::path p = r.string("csv");
    if (p.is_relative()) p = base_dir / p;
    out = CsvSource{p};
  } else {
    out = read_generator(r);
  }
  r.done();
  return out;
}

Term read_term(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of factors");
  Term term;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Reader f(j[i], index_path(path, i));
    Factor factor;
    const std::string signal = f.choice("signal", "", {"y", "u", "v"});
    factor.signal = signal == "y" ? Signal::y : signal == "u" ? Signal::u : Signal::v;
    factor.lag = f.integer("lag", factor.signal == Signal::u ? 0 : 1, 0);
    factor.power = f.integer("power", 1, 1);
    f.done();
    term.push_back(factor);
  }
  return term;
}

ModelFamily read_model(Reader r) {
  const std::string family = r.choice(
      "family", "", {"logistic", "pendulum", "linear2nd", "polynomial", "arx", "neural_oe"});
  ModelFamily out;
  if (family == "logistic") {
    out = LogisticMap{};
  } else if (family == "pendulum") {
    Pendulum p;
    p.mass = r.positive("mass", p.mass);
    p.delta = r.positive("delta", p.delta);
    out = p;
  } else if (family == "linear2nd") {
    out = Linear2ndOrderOE{};
  } else if (family == "arx") {
    out = linear_arx(r.required_int("n_y", 0), r.required_int("n_u", 0));
  } else if (family == "neural_oe") {
    NeuralNetOE n;
    n.hidden = r.integer("hidden", n.hidden, 1);
    n.n_y = r.integer("n_y", n.n_y, 1);
    n.n_u = r.integer("n_u", n.n_u, 0);
    out = n;
  } else {
    PolynomialModel p;
    const std::string kind = r.choice("kind", "narx", {"narx", "noe", "narmax"});
    p.kind = kind == "narx"  ? PolynomialModel::Kind::narx
             : kind == "noe" ? PolynomialModel::Kind::noe
                             : PolynomialModel::Kind::narmax;
    const json& terms = r.raw("terms");
    const std::string tpath = r.field("terms");
    if (!terms.is_array()) throw ConfigError(tpath, "expected an array of terms");
    for (std::size_t i = 0; i < terms.size(); ++i)
      p.terms.push_back(read_term(terms[i], index_path(tpath, i)));
    out = p;
  }
  r.done();
  try {
    lower_to_state_space(out);
  } catch (const StructureError& e) {
    throw ConfigError(r.path(), e.what());
  }
  return out;
}

FormulationSpec read_formulation(Reader r) {
  const std::string type = r.choice("type", "", {"single", "multiple", "msa"});
  FormulationSpec out;
  if (type == "single") {
    SingleSpec s;
    s.optimize_x0 = r.boolean("optimize_x0", true);
    if (r.has("fixed_x0")) {
      if (s.optimize_x0)
        throw ConfigError(r.field("fixed_x0"), "needs optimize_x0 = false");
      s.fixed_x0 = r.vector("fixed_x0");
    }
    out = s;
  } else if (type == "multiple") {
    MultipleSpec s;
    if (r.has("boundaries")) {
      if (r.has("max_len")) throw ConfigError(r.field("boundaries"), "give either max_len or boundaries");
      s.boundaries = r.int_list("boundaries");
      const std::string path = r.field("boundaries");
      if (s.boundaries.size() < 2) throw ConfigError(path, "needs at least two entries");
      if (s.boundaries.front() != 0) throw ConfigError(index_path(path, 0), "must be 0");
      for (std::size_t i = 1; i < s.boundaries.size(); ++i)
        if (s.boundaries[i] <= s.boundaries[i - 1])
          throw ConfigError(index_path(path, i),
                            s.boundaries[i] == s.boundaries[i - 1]
                                ? "duplicated boundary"
                                : "boundaries must be strictly increasing");
    } else {
      s.max_len = r.required_int("max_len", 1);
    }
    out = s;
  } else {
    MsaSpec s;
    s.incremental = r.boolean("incremental", false);
    if (s.incremental) {
      s.k_max = r.integer("k_max", s.k_max, 1);
      s.tolerance = r.non_negative("tolerance", s.tolerance);
      if (r.has("k")) throw ConfigError(r.field("k"), "not used with incremental = true");
    } else {
      s.k = r.required_int("k", 1);
    }
    out = s;
  }
  r.done();
  return out;
}

SolverOptions read_solver(Reader r) {
  SolverOptions o;
  o.max_iter = r.integer("max_iter", o.max_iter, 0);
  o.kkt_tol = r.positive("kkt_tol", o.kkt_tol);
  o.constraint_tol = r.positive("constraint_tol", o.constraint_tol);
  o.initial_radius = r.positive("initial_radius", o.initial_radius);
  o.max_radius = r.positive("max_radius", o.max_radius);
  o.min_radius = r.positive("min_radius", o.min_radius);
  o.initial_penalty = r.positive("initial_penalty", o.initial_penalty);
  o.penalty_margin = r.non_negative("penalty_margin", o.penalty_margin);
  o.penalty_factor = r.positive("penalty_factor", o.penalty_factor);
  o.eta = r.positive("eta", o.eta);
  o.accept_ratio = r.number("accept_ratio", o.accept_ratio);
  o.shrink_ratio = r.number("shrink_ratio", o.shrink_ratio);
  o.expand_ratio = r.number("expand_ratio", o.expand_ratio);
  o.shrink_factor = r.positive("shrink_factor", o.shrink_factor);
  o.expand_factor = r.positive("expand_factor", o.expand_factor);
  if (!(o.eta < 1.0)) throw ConfigError(r.field("eta"), "must lie in (0, 1)");
  if (!(o.penalty_factor < 1.0)) throw ConfigError(r.field("penalty_factor"), "must lie in (0, 1)");
  if (o.initial_radius > o.max_radius)
    throw ConfigError(r.field("initial_radius"), "exceeds max_radius");
  r.done();
  return o;
}

InitialSpec read_initial(Reader r) {
  InitialSpec s;
  if (r.has("theta")) s.theta = r.vector("theta");
  s.seeds = r.choice("seeds", s.seeds, {"data", "truth", "perturbed"});
  s.seed_noise = r.non_negative("seed_noise", s.seed_noise);
  r.done();
  return s;
}

// [[lo, hi, n], ...]
std::vector<std::vector<double>> read_axes(Reader& r, const std::string& key) {
  const json& j = r.raw(key);
  const std::string path = r.field(key);
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of [lo, hi, n]");
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = index_path(path, i);
    if (!j[i].is_array() || j[i].size() != 3) throw ConfigError(p, "expected [lo, hi, n]");
    const double lo = as_number(j[i][0], index_path(p, 0));
    const double hi = as_number(j[i][1], index_path(p, 1));
    const long long n = as_integer(j[i][2], index_path(p, 2));
    if (n < 1 || n > 100000) throw ConfigError(index_path(p, 2), "must lie in [1, 100000]");
    axes.push_back(linspace(lo, hi, static_cast<int>(n)));
  }
  return axes;
}

void check_positive_list(const std::vector<int>& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < 1) throw ConfigError(index_path(path, i), "must be >= 1");
}

StudySpec read_study(Reader r) {
  const std::string type =
      r.choice("type", "", {"multi_start", "monte_carlo", "grid_scan", "timing", "incremental"});
  StudySpec out;
  if (type == "multi_start") {
    MultiStartSpec s;
    s.axes = read_axes(r, "axes");
    if (r.has("max_lens")) {
      s.max_lens = r.int_list("max_lens");
      check_positive_list(s.max_lens, r.field("max_lens"));
    }
    s.tolerance = r.positive("tolerance", s.tolerance);
    s.relative = r.boolean("relative", s.relative);
    out = s;
  } else if (type == "monte_carlo") {
    MonteCarloSpec s;
    s.realizations = r.integer("realizations", s.realizations, 0);
    if (r.has("ms_lengths")) s.ms_lengths = r.int_list("ms_lengths");
    if (r.has("msa_horizons")) s.msa_horizons = r.int_list("msa_horizons");
    check_positive_list(s.ms_lengths, r.field("ms_lengths"));
    check_positive_list(s.msa_horizons, r.field("msa_horizons"));
    s.arx = r.boolean("arx", s.arx);
    s.oe_single = r.boolean("oe_single", s.oe_single);
    s.initial_guess = r.choice("initial_guess", s.initial_guess, {"arx", "truth", "fixed"});
    if (r.has("fixed_guess")) s.fixed_guess = r.vector("fixed_guess");
    if (s.initial_guess == "fixed" && !s.fixed_guess)
      throw ConfigError(r.field("fixed_guess"), "required when initial_guess is 'fixed'");
    out = s;
  } else if (type == "grid_scan") {
    GridScanSpec s;
    const json& axes = r.raw("axes");
    const std::string path = r.field("axes");
    if (!axes.is_array() || axes.empty() || axes.size() > 2)
      throw ConfigError(path, "expected one or two axes");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Reader a(axes[i], index_path(path, i));
      GridAxis g;
      g.param = a.required_int("param", 0);
      g.lower = a.number("lower");
      g.upper = a.number("upper");
      g.points = a.required_int("points", 1, 100000);
      a.done();
      s.axes.push_back(g);
    }
    if (s.axes.size() == 2 && s.axes[0].param == s.axes[1].param)
      throw ConfigError(index_path(path, 1) + ".param", "both axes scan the same parameter");
    out = s;
  } else if (type == "timing") {
    TimingSpec s;
    s.vary = r.choice("vary", s.vary, {"msa", "multiple"});
    s.settings = r.int_list("settings");
    check_positive_list(s.settings, r.field("settings"));
    s.repeats = r.integer("repeats", s.repeats, 1);
    s.batches = r.integer("batches", s.batches, 1);
    s.solve = r.boolean("solve", s.solve);
    out = s;
  } else {
    IncrementalSpec s;
    s.axes = read_axes(r, "axes");
    out = s;
  }
  r.done();
  return out;
}

Box read_box(Reader r) {
  Box b{r.vector("lower"), r.vector("upper")};
  if (b.lower.size() != b.upper.size())
    throw ConfigError(r.field("upper"), "lower and upper differ in length");
  for (int i = 0; i < b.lower.size(); ++i)
    if (!(b.lower(i) <= b.upper(i)))
      throw ConfigError(index_path(r.field("upper"), i), "upper bound below lower bound");
  r.done();
  return b;
}

SmoothnessSpec read_smoothness(Reader r) {
  SmoothnessSpec s;
  if (r.has("lengths")) s.lengths = r.int_list("lengths");
  check_positive_list(s.lengths, r.field("lengths"));
  s.box = read_box(r.object("box"));
  if (r.has("pairs")) {
    Reader p = r.object("pairs");
    s.sampling.uniform_pairs = p.integer("uniform", s.sampling.uniform_pairs, 0);
    s.sampling.local_pairs = p.integer("local", s.sampling.local_pairs, 0);
    if (p.has("separations")) {
      const Vec sep = p.vector("separations");
      s.sampling.separations.assign(sep.data(), sep.data() + sep.size());
    }
    s.sampling.use_gradient_norms = p.boolean("gradient_norms", s.sampling.use_gradient_norms);
    s.sampling.seed = static_cast<std::uint64_t>(p.integer("seed", 1, 0));
    p.done();
  }
  if (r.has("state_box")) s.state_box = read_box(r.object("state_box"));
  s.contraction_samples = r.integer("contraction_samples", s.contraction_samples, 1);
  if (r.has("interval_max_lens")) {
    s.interval_max_lens = r.int_list("interval_max_lens");
    check_positive_list(s.interval_max_lens, r.field("interval_max_lens"));
  }
  r.done();
  return s;
}

int generator_length(const GeneratorSpec& g) {
  return std::visit([](const auto& s) { return s.n; }, g);
}

void cross_check(const RunConfig& c) {
  const ModelPtr model = lower_to_state_space(c.model);
  const int np = model->param_dim(), nx = model->state_dim();
  const GeneratorSpec* gen = std::get_if<GeneratorSpec>(&c.data);

  if (c.initial.theta && c.initial.theta->size() != np)
    throw ConfigError("initial.theta", "has " + std::to_string(c.initial.theta->size()) +
                                           " entries, the model has " + std::to_string(np) +
                                           " parameters");
  if (!c.initial.theta && !gen)
    throw ConfigError("initial.theta", "required when the data does not come from a generator");
  if (!c.initial.theta && gen && generator_theta(*gen).size() != np)
    throw ConfigError("initial.theta", "required: the model does not match the generator");
  if (c.initial.seeds != "data" && !gen)
    throw ConfigError("initial.seeds", "'" + c.initial.seeds + "' needs generated data");
  if (c.initial.seeds != "data" && gen && generator_model(*gen).index() != c.model.index())
    throw ConfigError("initial.seeds", "true states need the generator's own model family");

  if (const auto* s = std::get_if<SingleSpec>(&c.formulation)) {
    if (s->fixed_x0 && s->fixed_x0->size() != nx)
      throw ConfigError("formulation.fixed_x0", "expected " + std::to_string(nx) + " entries");
  }
  if (const auto* m = std::get_if<MultipleSpec>(&c.formulation)) {
    if (gen && !m->boundaries.empty() && m->boundaries.back() != generator_length(*gen))
      throw ConfigError("formulation.boundaries",
                        "last boundary must equal the sample count " +
                            std::to_string(generator_length(*gen)));
  }

  if (c.command == "study") {
    if (!c.study) throw ConfigError("study", "required for command 'study'");
    if (const auto* ms = std::get_if<MultiStartSpec>(&*c.study)) {
      if (static_cast<int>(ms->axes.size()) != np)
        throw ConfigError("study.axes", "needs one axis per parameter (" + std::to_string(np) + ")");
    }
    if (const auto* inc = std::get_if<IncrementalSpec>(&*c.study)) {
      if (static_cast<int>(inc->axes.size()) != np)
        throw ConfigError("study.axes", "needs one axis per parameter (" + std::to_string(np) + ")");
      const auto* msa = std::get_if<MsaSpec>(&c.formulation);
      if (!msa || !msa->incremental)
        throw ConfigError("formulation", "incremental study needs an msa formulation with incremental = true");
    }
    if (const auto* mc = std::get_if<MonteCarloSpec>(&*c.study)) {
      if (!gen) throw ConfigError("data", "monte carlo study needs a generator");
      if (mc->fixed_guess && mc->fixed_guess->size() != np)
        throw ConfigError("study.fixed_guess", "expected " + std::to_string(np) + " entries");
    }
    if (const auto* gs = std::get_if<GridScanSpec>(&*c.study)) {
      for (std::size_t i = 0; i < gs->axes.size(); ++i)
        if (gs->axes[i].param < 0 || gs->axes[i].param >= np)
          throw ConfigError(index_path("study.axes", i) + ".param", "parameter index out of range");
    }
  }
  if (c.command == "smoothness") {
    if (!c.smoothness) throw ConfigError("smoothness", "required for command 'smoothness'");
    if (c.smoothness->box.dim() != np)
      throw ConfigError("smoothness.box.lower", "expected " + std::to_string(np) + " entries");
    if (c.smoothness->state_box && c.smoothness->state_box->dim() != nx)
      throw ConfigError("smoothness.state_box.lower", "expected " + std::to_string(nx) + " entries");
  }
}

RunConfig parse_with_base(const json& document, const std::string& profile,
                          const std::filesystem::path& base_dir) {
  if (!document.is_object()) throw ConfigError("<root>", "expected an object");
  json merged = document;
  if (merged.contains("profiles")) {
    const json& profiles = merged.at("profiles");
    if (!profiles.is_object()) throw ConfigError("profiles", "expected an object");
    for (auto it = profiles.begin(); it != profiles.end(); ++it) {
      if (it.key() != "desk" && it.key() != "paper")
        throw ConfigError("profiles." + it.key(), "unknown profile");
      if (!it.value().is_object()) throw ConfigError("profiles." + it.key(), "expected an object");
      if (it.value().contains("profiles"))
        throw ConfigError("profiles." + it.key() + ".profiles", "profiles cannot nest");
    }
    if (profiles.contains(profile)) merged.merge_patch(profiles.at(profile));
    merged.erase("profiles");
  } else if (profile != "desk" && profile != "paper") {
    throw ConfigError("profile", "unknown profile '" + profile + "'");
  }

  Reader r(merged, "");
  RunConfig c;
  c.command = r.choice("command", "", {"simulate", "estimate", "smoothness", "study"});
  if (r.has("description")) r.string("description");
  c.seed = static_cast<std::uint64_t>(r.integer("seed", 1, 0));
  c.output_dir = r.string("output_dir", c.output_dir);
  c.data = read_data(r.object("data"), base_dir);
  if (r.has("model")) {
    c.model = read_model(r.object("model"));
  } else if (const auto* g = std::get_if<GeneratorSpec>(&c.data)) {
    c.model = generator_model(*g);
  } else {
    throw ConfigError("model", "required when the data is read from a file");
  }
  if (r.has("formulation")) c.formulation = read_formulation(r.object("formulation"));
  if (r.has("solver")) c.solver = read_solver(r.object("solver"));
  if (r.has("initial")) c.initial = read_initial(r.object("initial"));
  if (r.has("study")) c.study = read_study(r.object("study"));
  if (r.has("smoothness")) c.smoothness = read_smoothness(r.object("smoothness"));
  r.done();
  cross_check(c);
  merged["profile"] = profile;
  c.echo = std::move(merged);
  return c;
}

}  // namespace

RunConfig parse_config(const json& document, const std::string& profile) {
  return parse_with_base(document, profile, std::filesystem::current_path());
}

RunConfig load_config(const std::filesystem::path& path, const std::string& profile) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/false);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_with_base(doc, profile, path.parent_path());
}

Dataset load_dataset(const RunConfig& config, std::uint64_t seed) {
  if (const auto* g = std::get_if<GeneratorSpec>(&config.data)) return generate(*g, seed);
  const auto& csv = std::get<CsvSource>(config.data);
  if (!std::filesystem::exists(csv.path))
    throw MissingFileError("cannot open data file " + csv.path.string());
  return read_csv(csv.path);
}

Formulation make_formulation(const FormulationSpec& spec, int samples) {
  if (const auto* s = std::get_if<SingleSpec>(&spec)) return SingleShooting{s->optimize_x0, s->fixed_x0};
  if (const auto* m = std::get_if<MultipleSpec>(&spec)) {
    if (m->boundaries.empty()) return MultipleShooting{ShootingPlan::uniform(samples, m->max_len)};
    try {
      return MultipleShooting{ShootingPlan::from_boundaries(m->boundaries, samples)};
    } catch (const std::invalid_argument& e) {
      throw ConfigError("formulation.boundaries", e.what());
    }
  }
  const auto& msa = std::get<MsaSpec>(spec);
  return MsaPem{msa.incremental ? 1 : msa.k};
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace msid
