#include "hankel/pipeline.hpp"

#include "detail/format.hpp"
#include "detail/json_io.hpp"
#include "hankel/asymptotics.hpp"
#include "hankel/operators.hpp"
#include "hankel/sequences.hpp"
#include "hankel/spectra.hpp"
#include "hankel/symbols.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace hankel {

namespace {

using detail::json;
using detail::complex_from_json;
using detail::get_bool;
using detail::get_integer;
using detail::get_number;
using detail::get_string;
using detail::get_unsigned;
using detail::reject_unknown;
using detail::require;

namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  raise(ErrorKind::validation, where + ": " + what);
}

// ---------------------------------------------------------------- config

struct ErrorTermSpec {
  complex scale{1.0, 0.0};
  double power = 2.0;
  double log_power = 0.0;
};

struct ModelConfig {
  enum class Kind { discrete, continuous, sequence, kernel, synthetic };

  Kind kind = Kind::discrete;
  DiscreteModel discrete;
  std::vector<std::optional<ErrorTermSpec>> errors;
  ContinuousModel continuous;
  std::vector<ExponentialTerm> exponentials;
  // sequence / kernel formulas
  std::string formula;
  double ratio = 0.5;
  double rate = 1.0;
  double alpha = 1.0;
  complex scale{1.0, 0.0};
  std::vector<complex> values;
  // synthetic blocks
  std::vector<std::vector<double>> blocks;
  std::optional<CrossPerturbation> perturbation;
  std::size_t ambient_dimension = 0;
  std::optional<std::uint64_t> seed;

  bool integral() const { return kind == Kind::continuous || kind == Kind::kernel; }
  std::optional<PredictedLaw> law() const {
    if (kind == Kind::discrete) return predicted_coefficient(discrete);
    if (kind == Kind::continuous) return predicted_coefficient(continuous);
    return std::nullopt;
  }
};

struct SpectrumConfig {
  std::size_t k = 0;
  StudyOptions::Method method = StudyOptions::Method::automatic;
  double tol = 1e-10;
  std::optional<std::uint64_t> seed;
  std::size_t dense_threshold = 1024;
  bool present = false;
};

struct AnalysisConfig {
  std::optional<IndexRange> window;
  bool fixed_alpha = true;
  std::optional<PredictedLaw> predicted;
  std::optional<double> alpha_tolerance;
  std::optional<double> c_tolerance;
  bool require_stabilized = false;
  bool require_decreasing = false;
  double drift_threshold = 0.02;
  std::optional<std::vector<double>> eps_grid;
  double eps_ratio = 0.9;
  std::size_t cross_k = 48;
  IndexRange cross_window{4, 40};
  double cross_slope_max = -3.0;
  double discrepancy_max = 0.1;
  bool trust_coarse = true;
  std::optional<IndexRange> count_range;
};

struct TraceConfig {
  std::string name;
  std::string symbol;
  std::vector<double> grid;
  std::optional<double> alpha;
  int m = 0;
  double t0 = 1.0;
};

struct GenConfig {
  IndexRange range{0, 64};
  std::vector<double> t_grid;
  std::vector<TraceConfig> traces;
  std::optional<IndexRange> certificate_window;
  int certificate_m = 0;
};

struct OperatorConfig {
  std::vector<std::size_t> dims; // section sizes, or panel counts for integral kernels
  MeshSpec mesh;
};

struct ExperimentConfig {
  std::string name;
  ModelConfig model;
  std::vector<ModelConfig> parts;
  OperatorConfig op;
  SpectrumConfig spectrum;
  AnalysisConfig analysis;
  GenConfig gen;
  std::string out_dir;
  std::string hash;
  std::optional<PredictedLaw> law;
};

std::string join(const std::string& where, const std::string& key) { return where + "." + key; }

std::vector<double> number_list(const json& value, const std::string& where) {
  if (!value.is_array()) invalid(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(get_number(value[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

IndexRange range_from_json(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2) invalid(where, "expected [lo, hi]");
  IndexRange r{get_integer(value[0], where + "[0]"), get_integer(value[1], where + "[1]")};
  if (r.hi < r.lo) invalid(where, "hi must not be below lo");
  return r;
}

// {"from", "to", "count", "spacing"} or an explicit list.
std::vector<double> grid_from_json(const json& value, const std::string& where) {
  if (value.is_array()) return number_list(value, where);
  reject_unknown(value, {"from", "to", "count", "spacing"}, where);
  const double from = get_number(require(value, "from", where), join(where, "from"));
  const double to = get_number(require(value, "to", where), join(where, "to"));
  const auto count = get_unsigned(require(value, "count", where), join(where, "count"));
  const std::string spacing = value.contains("spacing") ? get_string(value["spacing"], join(where, "spacing")) : "linear";
  if (count < 2) invalid(join(where, "count"), "need at least 2 points");
  if (spacing != "linear" && spacing != "log") invalid(join(where, "spacing"), "expected \"linear\" or \"log\"");
  if (spacing == "log" && !(from > 0.0 && to > 0.0)) invalid(where, "log spacing needs positive endpoints");
  std::vector<double> grid(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = spacing == "log" ? std::exp(std::log(from) + s * (std::log(to) - std::log(from))) : from + s * (to - from);
  }
  grid.back() = to;
  return grid;
}

ModelConfig model_from_json(const json& value, const std::string& where) {
  detail::require_object(value, where);
  const std::string kind = get_string(require(value, "kind", where), join(where, "kind"));
  ModelConfig m;
  if (kind == "discrete") {
    m.kind = ModelConfig::Kind::discrete;
    m.discrete = detail::discrete_model_from_json(value, where);
    const json& terms = value["terms"];
    bool any = false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (!terms[i].contains("error")) {
        m.errors.emplace_back();
        continue;
      }
      const std::string w = where + ".terms[" + std::to_string(i) + "].error";
      const json& e = terms[i]["error"];
      reject_unknown(e, {"scale", "power", "log_power"}, w);
      ErrorTermSpec spec;
      if (e.contains("scale")) spec.scale = complex_from_json(e["scale"], join(w, "scale"));
      if (e.contains("power")) spec.power = get_number(e["power"], join(w, "power"));
      if (e.contains("log_power")) spec.log_power = get_number(e["log_power"], join(w, "log_power"));
      m.errors.push_back(spec);
      any = true;
    }
    if (!any) m.errors.clear();
    m.discrete.validate();
  } else if (kind == "continuous") {
    m.kind = ModelConfig::Kind::continuous;
    m.continuous = detail::continuous_model_from_json(value, where);
    if (value.contains("exponentials")) {
      const json& list = value["exponentials"];
      const std::string w = join(where, "exponentials");
      if (!list.is_array()) invalid(w, "expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string wi = w + "[" + std::to_string(i) + "]";
        reject_unknown(list[i], {"b", "rate"}, wi);
        ExponentialTerm t;
        if (list[i].contains("b")) t.b = complex_from_json(list[i]["b"], join(wi, "b"));
        t.rate = get_number(require(list[i], "rate", wi), join(wi, "rate"));
        if (!(t.rate > 0.0)) invalid(join(wi, "rate"), "must be positive");
        m.exponentials.push_back(t);
      }
    }
    m.continuous.validate();
    if (m.continuous.local_bump && m.continuous.local_bump->m + 1 != m.continuous.order.alpha) {
      std::ostringstream os;
      os << "a local bump of order m = " << m.continuous.local_bump->m << " fixes alpha = m + 1 = "
         << m.continuous.local_bump->m + 1 << " (the bump and the model terms must share one power law), got alpha = "
         << m.continuous.order.alpha;
      invalid(join(where, "alpha"), os.str());
    }
  } else if (kind == "sequence") {
    m.kind = ModelConfig::Kind::sequence;
    reject_unknown(value, {"kind", "formula", "ratio", "alpha", "scale", "values"}, where);
    if (value.contains("values")) {
      if (value.contains("formula")) invalid(where, "give either formula or values");
      const json& list = value["values"];
      if (!list.is_array() || list.size() < 2) invalid(join(where, "values"), "expected at least two entries");
      for (std::size_t i = 0; i < list.size(); ++i) {
        m.values.push_back(complex_from_json(list[i], where + ".values[" + std::to_string(i) + "]"));
      }
      m.formula = "values";
    } else {
      m.formula = get_string(require(value, "formula", where), join(where, "formula"));
      if (m.formula != "geometric" && m.formula != "hilbert" && m.formula != "model") {
        invalid(join(where, "formula"), "expected \"geometric\", \"hilbert\" or \"model\"");
      }
    }
    if (value.contains("ratio")) m.ratio = get_number(value["ratio"], join(where, "ratio"));
    if (value.contains("alpha")) m.alpha = get_number(value["alpha"], join(where, "alpha"));
    if (value.contains("scale")) m.scale = complex_from_json(value["scale"], join(where, "scale"));
    if (m.formula == "geometric" && !(std::abs(m.ratio) < 1.0)) invalid(join(where, "ratio"), "need |ratio| < 1");
  } else if (kind == "kernel") {
    m.kind = ModelConfig::Kind::kernel;
    reject_unknown(value, {"kind", "formula", "rate", "scale"}, where);
    m.formula = get_string(require(value, "formula", where), join(where, "formula"));
    if (m.formula != "exponential") invalid(join(where, "formula"), "expected \"exponential\"");
    if (value.contains("rate")) m.rate = get_number(value["rate"], join(where, "rate"));
    if (value.contains("scale")) m.scale = complex_from_json(value["scale"], join(where, "scale"));
    if (!(m.rate > 0.0)) invalid(join(where, "rate"), "must be positive");
  } else if (kind == "synthetic") {
    m.kind = ModelConfig::Kind::synthetic;
    reject_unknown(value, {"kind", "blocks", "perturbation", "ambient_dimension", "seed"}, where);
    const json& blocks = require(value, "blocks", where);
    const std::string bw = join(where, "blocks");
    if (!blocks.is_array() || blocks.empty()) invalid(bw, "expected a nonempty array");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string w = bw + "[" + std::to_string(i) + "]";
      reject_unknown(blocks[i], {"values", "c", "alpha", "count"}, w);
      std::vector<double> s;
      if (blocks[i].contains("values")) {
        s = number_list(blocks[i]["values"], join(w, "values"));
      } else {
        const double c = get_number(require(blocks[i], "c", w), join(w, "c"));
        const double a = get_number(require(blocks[i], "alpha", w), join(w, "alpha"));
        const auto count = get_unsigned(require(blocks[i], "count", w), join(w, "count"));
        for (std::uint64_t n = 1; n <= count; ++n) s.push_back(c * std::pow(static_cast<double>(n), -a));
      }
      if (s.empty()) invalid(w, "block is empty");
      std::sort(s.begin(), s.end(), std::greater<>());
      m.blocks.push_back(std::move(s));
    }
    if (value.contains("perturbation")) {
      const std::string w = join(where, "perturbation");
      reject_unknown(value["perturbation"], {"scale", "power"}, w);
      CrossPerturbation p;
      if (value["perturbation"].contains("scale")) p.scale = get_number(value["perturbation"]["scale"], join(w, "scale"));
      if (value["perturbation"].contains("power")) p.power = get_number(value["perturbation"]["power"], join(w, "power"));
      m.perturbation = p;
    }
    if (value.contains("ambient_dimension")) {
      m.ambient_dimension = get_unsigned(value["ambient_dimension"], join(where, "ambient_dimension"));
    }
    if (value.contains("seed")) m.seed = get_unsigned(value["seed"], join(where, "seed"));
    if (!m.seed) invalid(join(where, "seed"), "synthetic blocks need a seed (or --seed)");
  } else {
    invalid(join(where, "kind"), "expected discrete, continuous, sequence, kernel or synthetic");
  }
  return m;
}

json apply_overrides(json config, const std::optional<std::uint64_t>& seed) {
  if (!config.is_object()) invalid("config", "expected a JSON object");
  if (seed) {
    if (!config.contains("spectrum")) config["spectrum"] = json::object();
    if (config["spectrum"].is_object()) config["spectrum"]["seed"] = *seed;
    if (config.contains("model") && config["model"].is_object() && config["model"].value("kind", "") == "synthetic") {
      config["model"]["seed"] = *seed;
    }
  }
  return config;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
}

std::string hash_of(const json& config) {
  json canonical = config;
  canonical.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buf;
}

ExperimentConfig parse_config(const json& config) {
  reject_unknown(config, {"name", "model", "parts", "operator", "spectrum", "analysis", "gen", "output"}, "config");
  ExperimentConfig cfg;
  cfg.hash = hash_of(config);
  if (config.contains("name")) cfg.name = get_string(config["name"], "config.name");
  cfg.model = model_from_json(require(config, "model", "config"), "config.model");
  cfg.law = cfg.model.law();

  if (config.contains("parts")) {
    const json& parts = config["parts"];
    if (!parts.is_array()) invalid("config.parts", "expected an array");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      cfg.parts.push_back(model_from_json(parts[i], "config.parts[" + std::to_string(i) + "]"));
    }
  }

  const bool synthetic = cfg.model.kind == ModelConfig::Kind::synthetic;
  if (config.contains("operator")) {
    const json& op = config["operator"];
    const std::string w = "config.operator";
    reject_unknown(op, {"N", "sweep", "mesh", "panel_sweep"}, w);
    if (synthetic) invalid(w, "synthetic models take their dimension from the blocks");
    if (cfg.model.integral()) {
      if (op.contains("N") || op.contains("sweep")) invalid(w, "integral kernels are sized by mesh.panels / panel_sweep");
      KernelSpec probe = cfg.model.kind == ModelConfig::Kind::continuous
                             ? KernelSpec::from_model(cfg.model.continuous)
                             : KernelSpec::custom([](double) { return complex{}; }, "probe");
      cfg.op.mesh = MeshSpec::defaults_for(probe);
      if (op.contains("mesh")) cfg.op.mesh = detail::mesh_from_json(op["mesh"], cfg.op.mesh, join(w, "mesh"));
      cfg.op.mesh.validate();
      if (op.contains("panel_sweep")) {
        for (double p : number_list(op["panel_sweep"], join(w, "panel_sweep"))) {
          if (!(p >= 1) || p != std::floor(p)) invalid(join(w, "panel_sweep"), "expected positive integers");
          cfg.op.dims.push_back(static_cast<std::size_t>(p));
        }
      } else {
        cfg.op.dims.push_back(cfg.op.mesh.panels);
      }
    } else {
      if (op.contains("mesh") || op.contains("panel_sweep")) invalid(w, "mesh settings apply to integral kernels only");
      if (op.contains("N") == op.contains("sweep")) invalid(w, "give exactly one of N or sweep");
      if (op.contains("N")) {
        cfg.op.dims.push_back(get_unsigned(op["N"], join(w, "N")));
      } else {
        for (double n : number_list(op["sweep"], join(w, "sweep"))) {
          if (!(n >= 1) || n != std::floor(n)) invalid(join(w, "sweep"), "expected positive integers");
          cfg.op.dims.push_back(static_cast<std::size_t>(n));
        }
      }
    }
    for (std::size_t i = 0; i < cfg.op.dims.size(); ++i) {
      if (cfg.op.dims[i] < 2) invalid(w, "dimensions must be at least 2");
      if (i > 0 && cfg.op.dims[i] <= cfg.op.dims[i - 1]) invalid(w, "sweep must be strictly increasing");
    }
  } else if (cfg.model.integral()) {
    KernelSpec probe = cfg.model.kind == ModelConfig::Kind::continuous ? KernelSpec::from_model(cfg.model.continuous)
                                                                       : KernelSpec::custom([](double) { return complex{}; }, "probe");
    cfg.op.mesh = MeshSpec::defaults_for(probe);
    cfg.op.dims.push_back(cfg.op.mesh.panels);
  }

  if (config.contains("spectrum")) {
    const json& s = config["spectrum"];
    const std::string w = "config.spectrum";
    reject_unknown(s, {"k", "method", "tol", "seed", "dense_threshold"}, w);
    cfg.spectrum.present = true;
    if (s.contains("k")) cfg.spectrum.k = get_unsigned(s["k"], join(w, "k"));
    if (s.contains("method")) {
      const std::string method = get_string(s["method"], join(w, "method"));
      if (method == "auto") {
        cfg.spectrum.method = StudyOptions::Method::automatic;
      } else if (method == "dense") {
        cfg.spectrum.method = StudyOptions::Method::dense;
      } else if (method == "lanczos") {
        cfg.spectrum.method = StudyOptions::Method::lanczos;
      } else {
        invalid(join(w, "method"), "expected auto, dense or lanczos");
      }
    }
    if (s.contains("tol")) cfg.spectrum.tol = get_number(s["tol"], join(w, "tol"));
    if (s.contains("seed")) cfg.spectrum.seed = get_unsigned(s["seed"], join(w, "seed"));
    if (s.contains("dense_threshold")) cfg.spectrum.dense_threshold = get_unsigned(s["dense_threshold"], join(w, "dense_threshold"));
    if (!(cfg.spectrum.tol > 0.0)) invalid(join(w, "tol"), "must be positive");
  }

  if (config.contains("analysis")) {
    const json& a = config["analysis"];
    const std::string w = "config.analysis";
    reject_unknown(a, {"window", "fixed_alpha", "predicted", "tolerance", "require_stabilized", "require_decreasing",
                       "drift_threshold", "eps_grid", "cross_k", "cross_window", "cross_slope_max", "discrepancy_max",
                       "trust_coarse", "count_range"},
                   w);
    auto& an = cfg.analysis;
    if (a.contains("window")) an.window = range_from_json(a["window"], join(w, "window"));
    if (a.contains("fixed_alpha")) an.fixed_alpha = get_bool(a["fixed_alpha"], join(w, "fixed_alpha"));
    if (a.contains("predicted")) {
      const std::string pw = join(w, "predicted");
      reject_unknown(a["predicted"], {"c", "alpha"}, pw);
      an.predicted = PredictedLaw{get_number(require(a["predicted"], "c", pw), join(pw, "c")),
                                  get_number(require(a["predicted"], "alpha", pw), join(pw, "alpha"))};
    }
    if (a.contains("tolerance")) {
      const std::string tw = join(w, "tolerance");
      reject_unknown(a["tolerance"], {"alpha", "c"}, tw);
      if (a["tolerance"].contains("alpha")) an.alpha_tolerance = get_number(a["tolerance"]["alpha"], join(tw, "alpha"));
      if (a["tolerance"].contains("c")) an.c_tolerance = get_number(a["tolerance"]["c"], join(tw, "c"));
    }
    if (a.contains("require_stabilized")) an.require_stabilized = get_bool(a["require_stabilized"], join(w, "require_stabilized"));
    if (a.contains("require_decreasing")) an.require_decreasing = get_bool(a["require_decreasing"], join(w, "require_decreasing"));
    if (a.contains("drift_threshold")) an.drift_threshold = get_number(a["drift_threshold"], join(w, "drift_threshold"));
    if (a.contains("eps_grid")) {
      const json& g = a["eps_grid"];
      const std::string gw = join(w, "eps_grid");
      if (g.is_array()) {
        an.eps_grid = number_list(g, gw);
      } else {
        reject_unknown(g, {"hi", "lo", "ratio"}, gw);
        const double ratio = g.contains("ratio") ? get_number(g["ratio"], join(gw, "ratio")) : 0.9;
        an.eps_grid = geometric_eps_grid(get_number(require(g, "hi", gw), join(gw, "hi")),
                                         get_number(require(g, "lo", gw), join(gw, "lo")), ratio);
      }
    }
    if (a.contains("cross_k")) an.cross_k = get_unsigned(a["cross_k"], join(w, "cross_k"));
    if (a.contains("cross_window")) an.cross_window = range_from_json(a["cross_window"], join(w, "cross_window"));
    if (a.contains("cross_slope_max")) an.cross_slope_max = get_number(a["cross_slope_max"], join(w, "cross_slope_max"));
    if (a.contains("discrepancy_max")) an.discrepancy_max = get_number(a["discrepancy_max"], join(w, "discrepancy_max"));
    if (a.contains("trust_coarse")) an.trust_coarse = get_bool(a["trust_coarse"], join(w, "trust_coarse"));
    if (a.contains("count_range")) an.count_range = range_from_json(a["count_range"], join(w, "count_range"));
  }
  if (cfg.analysis.predicted) cfg.law = cfg.analysis.predicted;

  if (config.contains("gen")) {
    const json& g = config["gen"];
    const std::string w = "config.gen";
    reject_unknown(g, {"range", "t_grid", "traces", "certificate_window", "certificate_m"}, w);
    if (g.contains("range")) cfg.gen.range = range_from_json(g["range"], join(w, "range"));
    if (cfg.gen.range.lo < 0) invalid(join(w, "range"), "indices start at 0");
    if (g.contains("t_grid")) cfg.gen.t_grid = grid_from_json(g["t_grid"], join(w, "t_grid"));
    if (g.contains("certificate_window")) cfg.gen.certificate_window = range_from_json(g["certificate_window"], join(w, "certificate_window"));
    if (g.contains("certificate_m")) cfg.gen.certificate_m = static_cast<int>(get_unsigned(g["certificate_m"], join(w, "certificate_m")));
    if (g.contains("traces")) {
      const json& traces = g["traces"];
      if (!traces.is_array()) invalid(join(w, "traces"), "expected an array");
      for (std::size_t i = 0; i < traces.size(); ++i) {
        const std::string tw = w + ".traces[" + std::to_string(i) + "]";
        reject_unknown(traces[i], {"name", "symbol", "grid", "alpha", "m", "t0"}, tw);
        TraceConfig t;
        t.symbol = get_string(require(traces[i], "symbol", tw), join(tw, "symbol"));
        static const char* known[] = {"composite", "sigma", "sigma_zero", "sigma_infinity", "tau", "cayley"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return t.symbol == k; })) {
          invalid(join(tw, "symbol"), "expected composite, sigma, sigma_zero, sigma_infinity, tau or cayley");
        }
        t.name = traces[i].contains("name") ? get_string(traces[i]["name"], join(tw, "name")) : t.symbol;
        if (t.name.empty() || t.name.find_first_of("/\\ ") != std::string::npos) invalid(join(tw, "name"), "not a plain file stem");
        t.grid = grid_from_json(require(traces[i], "grid", tw), join(tw, "grid"));
        if (traces[i].contains("alpha")) t.alpha = get_number(traces[i]["alpha"], join(tw, "alpha"));
        if (traces[i].contains("m")) t.m = static_cast<int>(get_unsigned(traces[i]["m"], join(tw, "m")));
        if (traces[i].contains("t0")) t.t0 = get_number(traces[i]["t0"], join(tw, "t0"));
        const bool needs_discrete = t.symbol == "composite" || t.symbol == "cayley";
        if (needs_discrete && cfg.model.kind != ModelConfig::Kind::discrete &&
            !(t.symbol == "composite" && cfg.model.kind == ModelConfig::Kind::continuous)) {
          invalid(join(tw, "symbol"), "this trace needs a discrete (or, for composite, continuous) model");
        }
        cfg.gen.traces.push_back(t);
      }
    }
  }

  if (config.contains("output")) {
    reject_unknown(config["output"], {"dir"}, "config.output");
    if (config["output"].contains("dir")) cfg.out_dir = get_string(config["output"]["dir"], "config.output.dir");
  }
  return cfg;
}

// ---------------------------------------------------------------- building

SequenceSlice build_slice(const ModelConfig& m, std::int64_t last) {
  switch (m.kind) {
  case ModelConfig::Kind::discrete: {
    std::vector<ErrorSequence> errors;
    for (const auto& e : m.errors) {
      errors.push_back(e ? power_error_term(e->scale, e->power, e->log_power) : ErrorSequence{});
    }
    return oscillating_slice(m.discrete, errors, last);
  }
  case ModelConfig::Kind::sequence: {
    if (m.formula == "values") {
      if (static_cast<std::int64_t>(m.values.size()) <= last) {
        std::ostringstream os;
        os << "explicit sequence has " << m.values.size() << " entries; " << last + 1 << " are needed";
        raise(ErrorKind::length, os.str());
      }
      return custom_slice(std::vector<complex>(m.values.begin(), m.values.begin() + last + 1), "explicit values");
    }
    if (m.formula == "model") {
      std::vector<complex> v(static_cast<std::size_t>(last + 1));
      for (std::int64_t j = 0; j <= last; ++j) v[j] = m.scale * model_sequence(m.alpha, j);
      return custom_slice(std::move(v), "scaled model sequence, alpha = " + detail::fmt(m.alpha));
    }
    std::vector<complex> v(static_cast<std::size_t>(last + 1));
    double p = 1.0;
    for (std::int64_t j = 0; j <= last; ++j) {
      v[j] = m.formula == "geometric" ? m.scale * p : m.scale / static_cast<double>(j + 1);
      p *= m.ratio;
    }
    return custom_slice(std::move(v), m.formula == "geometric" ? "geometric, ratio " + detail::fmt(m.ratio) : "hilbert");
  }
  default:
    raise(ErrorKind::validation, "this model does not define a sequence");
  }
}

KernelSpec build_kernel(const ModelConfig& m) {
  if (m.kind == ModelConfig::Kind::continuous) return KernelSpec::from_model(m.continuous, m.exponentials);
  if (m.kind == ModelConfig::Kind::kernel) {
    const complex scale = m.scale;
    const double rate = m.rate;
    return KernelSpec::custom([scale, rate](double t) { return scale * std::exp(-rate * t); },
                              "exponential kernel, rate " + detail::fmt(rate));
  }
  raise(ErrorKind::validation, "this model does not define a kernel");
}

Synthesis build_synthesis(const ModelConfig& m) {
  return block_orthogonal_synthesis(m.blocks, m.perturbation, *m.seed, m.ambient_dimension);
}

OperatorBuilder operator_builder(const ExperimentConfig& cfg, const ModelConfig& m) {
  if (m.integral()) {
    const KernelSpec spec = build_kernel(m);
    const MeshSpec base = cfg.op.mesh;
    return [spec, base](std::size_t panels) -> std::unique_ptr<LinearOperator> {
      MeshSpec mesh = base;
      mesh.panels = panels;
      return std::make_unique<IntegralDiscretization>(discretize_kernel(spec, mesh));
    };
  }
  if (m.kind == ModelConfig::Kind::synthetic) {
    auto matrix = std::make_shared<DenseMatrix>(build_synthesis(m).matrix);
    return [matrix](std::size_t) -> std::unique_ptr<LinearOperator> {
      return std::make_unique<MatrixOperator>(*matrix, "block-orthogonal synthesis");
    };
  }
  return [&m](std::size_t n) -> std::unique_ptr<LinearOperator> {
    return std::make_unique<HankelSection>(HankelSection::build(build_slice(m, static_cast<std::int64_t>(2 * n - 2)), n));
  };
}

StudyOptions study_options(const ExperimentConfig& cfg, const RunOptions& options) {
  StudyOptions s;
  s.method = cfg.spectrum.method;
  s.dense_threshold = cfg.spectrum.dense_threshold;
  if (options.dense_cap) s.dense_cap = *options.dense_cap;
  s.tol = cfg.spectrum.tol;
  s.seed = cfg.spectrum.seed.value_or(0);
  s.drift_threshold = cfg.analysis.drift_threshold;
  s.threads = std::max(1u, options.threads);
  return s;
}

SingularValueSeries compute_series(const LinearOperator& op, std::size_t k, const StudyOptions& s) {
  const std::size_t n = std::min(op.rows(), op.cols());
  const bool dense = s.method == StudyOptions::Method::dense ||
                     (s.method == StudyOptions::Method::automatic && n <= s.dense_threshold);
  if (!dense) return lanczos_topk(op, k, s.tol, s.seed);
  SingularValueSeries out = dense_svd(op, s.dense_cap);
  if (out.values.size() > k) out.values.resize(k);
  return out;
}

void require_spectrum(const ExperimentConfig& cfg, std::size_t dimension) {
  if (!cfg.spectrum.present || cfg.spectrum.k == 0) invalid("config.spectrum.k", "a positive k is required");
  if (!cfg.spectrum.seed) invalid("config.spectrum.seed", "a seed is required (or pass --seed)");
  if (4 * cfg.spectrum.k > dimension) {
    std::ostringstream os;
    os << "k = " << cfg.spectrum.k << " exceeds N/4 for N = " << dimension;
    invalid("config.spectrum.k", os.str());
  }
}

// Dimension of the operator for a nominal size (panels map to node counts).
std::size_t operator_dimension(const ExperimentConfig& cfg, const ModelConfig& m, std::size_t nominal) {
  if (m.integral()) return nominal * cfg.op.mesh.nodes_per_panel;
  if (m.kind == ModelConfig::Kind::synthetic) {
    std::size_t total = 0;
    for (const auto& b : m.blocks) total += b.size();
    return std::max(total, m.ambient_dimension);
  }
  return nominal;
}

// ---------------------------------------------------------------- outputs

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Outputs {
public:
  Outputs(fs::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {}

  void write(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) raise(ErrorKind::io, "cannot create output directory " + dir_.string() + ": " + ec.message());
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    os.close();
    if (!os) raise(ErrorKind::io, "cannot write " + path.string());
    files_.push_back(path.string());
  }

  void write_json(const std::string& name, json doc) {
    doc["config_hash"] = hash_;
    doc["version"] = tool_version;
    write(name, doc.dump(2) + "\n");
  }

  std::string csv_preamble(const std::vector<std::pair<std::string, std::string>>& extra = {}) const {
    std::ostringstream os;
    os << "# tool=hankel " << tool_version << "\n# config_hash=" << hash_ << "\n";
    for (const auto& [k, v] : extra) os << "# " << k << "=" << v << "\n";
    return os.str();
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

private:
  fs::path dir_;
  std::string hash_;
  std::vector<std::string> files_;
};

std::vector<std::pair<std::string, std::string>> meta_lines(const SeriesMeta& meta) {
  return {{"dimension", std::to_string(meta.dimension)},
          {"method", to_string(meta.method)},
          {"tolerance", detail::fmt(meta.tolerance)},
          {"reorthogonalization", meta.reorthogonalization},
          {"seed", std::to_string(meta.seed)},
          {"converged", meta.converged ? "true" : "false"},
          {"converged_count", std::to_string(meta.converged_count)},
          {"steps", std::to_string(meta.steps)},
          {"source", meta.source}};
}

std::string series_file(const SingularValueSeries& s) { return "spectrum_N" + std::to_string(s.meta.dimension) + ".csv"; }

struct Verdict {
  bool pass = true;
  json checks = json::object();

  void check(const std::string& name, bool ok) {
    checks[name] = ok;
    pass = pass && ok;
  }
};

// ---------------------------------------------------------------- commands

struct CommandResult {
  ExitCode code = ExitCode::pass;
  json summary = json::object();
};

void trace_csv(Outputs& out, const ExperimentConfig& cfg, const TraceConfig& t) {
  std::ostringstream os;
  os << out.csv_preamble({{"symbol", t.symbol}});
  const double alpha = t.alpha.value_or(cfg.model.kind == ModelConfig::Kind::continuous ? cfg.model.continuous.order.alpha
                                        : cfg.model.kind == ModelConfig::Kind::discrete ? cfg.model.discrete.order.alpha
                                                                                        : 1.0);
  if (t.symbol == "sigma") {
    write_trace(os, model_circle_symbol(alpha), t.grid);
  } else if (t.symbol == "sigma_zero") {
    write_trace(os, model_line_symbol(LineKind::zero, alpha), t.grid);
  } else if (t.symbol == "sigma_infinity") {
    write_trace(os, model_line_symbol(LineKind::infinity, alpha), t.grid);
  } else if (t.symbol == "tau") {
    write_trace(os, tau_symbol(t.m, t.t0), t.grid);
  } else if (t.symbol == "cayley") {
    write_trace(os, cayley_transfer(composite_symbol(cfg.model.discrete)), t.grid);
  } else if (cfg.model.kind == ModelConfig::Kind::discrete) {
    write_trace(os, composite_symbol(cfg.model.discrete), t.grid);
  } else {
    write_trace(os, composite_symbol(cfg.model.continuous), t.grid);
  }
  out.write("trace_" + t.name + ".csv", os.str());
}

CommandResult cmd_gen(const ExperimentConfig& cfg, Outputs& out) {
  CommandResult r;
  const auto& m = cfg.model;
  if (m.kind == ModelConfig::Kind::discrete || m.kind == ModelConfig::Kind::sequence) {
    const SequenceSlice h = build_slice(m, std::max<std::int64_t>(cfg.gen.range.hi, 1));
    std::ostringstream os;
    os << out.csv_preamble({{"source", h.source().description}});
    os << "j,re,im\n";
    for (std::int64_t j = cfg.gen.range.lo; j <= cfg.gen.range.hi; ++j) {
      os << j << ',' << detail::fmt(h[j].real()) << ',' << detail::fmt(h[j].imag()) << '\n';
    }
    out.write("sequence.csv", os.str());
    if (m.kind == ModelConfig::Kind::discrete && cfg.gen.certificate_window) {
      const IndexRange w = *cfg.gen.certificate_window;
      for (std::size_t l = 0; l < m.errors.size(); ++l) {
        if (!m.errors[l]) continue;
        const auto g = power_error_term(m.errors[l]->scale, m.errors[l]->power, m.errors[l]->log_power);
        std::vector<complex> v(static_cast<std::size_t>(w.hi + cfg.gen.certificate_m + 1));
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = g(static_cast<std::int64_t>(j));
        const auto cert = decay_certificate(custom_slice(std::move(v), "error term"), m.discrete.order.alpha,
                                            cfg.gen.certificate_m, w);
        out.write_json("certificate_" + std::to_string(l) + ".json", {{"term", l}, {"certificate", detail::to_json(cert)}});
      }
    }
  } else if (m.integral()) {
    const KernelSpec spec = build_kernel(m);
    std::vector<double> grid = cfg.gen.t_grid;
    if (grid.empty()) {
      for (int i = 0; i <= 120; ++i) grid.push_back(std::pow(10.0, -3.0 + 6.0 * i / 120.0));
    }
    std::ostringstream os;
    os << out.csv_preamble({{"kernel", spec.description}});
    os << "t,re,im\n";
    for (double t : grid) {
      if (!(t > 0.0)) invalid("config.gen.t_grid", "kernel points must be positive");
      const complex h = spec(t);
      os << detail::fmt(t) << ',' << detail::fmt(h.real()) << ',' << detail::fmt(h.imag()) << '\n';
    }
    out.write("kernel.csv", os.str());
  } else {
    const Synthesis syn = build_synthesis(m);
    std::ostringstream os;
    os << out.csv_preamble({{"source", "block-orthogonal synthesis"}});
    os << "n,s_n\n";
    for (std::size_t i = 0; i < syn.union_sorted.size(); ++i) os << i + 1 << ',' << detail::fmt(syn.union_sorted[i]) << '\n';
    out.write("blocks.csv", os.str());
  }
  for (const auto& t : cfg.gen.traces) trace_csv(out, cfg, t);
  json summary = {{"command", "gen"}, {"files", out.files().size()}};
  if (cfg.law) summary["predicted"] = detail::to_json(*cfg.law);
  out.write_json("gen.json", summary);
  r.summary = {{"verdict", "done"}};
  return r;
}

struct SpectrumRun {
  std::vector<SingularValueSeries> series;
  std::optional<ConvergenceStudy> study;
  bool loaded = false;
};

void require_sized(const ExperimentConfig& cfg) {
  if (cfg.model.kind != ModelConfig::Kind::synthetic && cfg.op.dims.empty()) {
    invalid("config.operator", "operator.N or operator.sweep is required");
  }
}

SpectrumRun compute_spectra(const ExperimentConfig& cfg, const RunOptions& options) {
  require_sized(cfg);
  const auto& m = cfg.model;
  std::vector<std::size_t> dims = cfg.op.dims;
  if (m.kind == ModelConfig::Kind::synthetic) dims = {operator_dimension(cfg, m, 0)};
  for (std::size_t d : dims) require_spectrum(cfg, operator_dimension(cfg, m, d));

  const StudyOptions s = study_options(cfg, options);
  const OperatorBuilder builder = operator_builder(cfg, m);
  SpectrumRun run;
  if (dims.size() >= 2) {
    run.study = convergence_study(builder, cfg.spectrum.k, dims, s);
    run.series = run.study->series;
  } else {
    const auto op = builder(dims.front());
    run.series.push_back(compute_series(*op, cfg.spectrum.k, s));
  }
  return run;
}

void write_spectra(const ExperimentConfig& cfg, const SpectrumRun& run, Outputs& out) {
  json list = json::array();
  for (const auto& s : run.series) {
    std::ostringstream os;
    os << out.csv_preamble(meta_lines(s.meta));
    write_csv(os, s, cfg.law);
    out.write(series_file(s), os.str());
    json values = json::array();
    for (double v : s.values) values.push_back(v);
    list.push_back({{"meta", detail::to_json(s.meta)}, {"values", values}, {"file", series_file(s)}});
  }
  json doc = {{"command", "spectrum"}, {"k", cfg.spectrum.k}, {"series", list}};
  if (cfg.model.integral()) doc["mesh"] = detail::to_json(cfg.op.mesh);
  if (cfg.law) doc["predicted"] = detail::to_json(*cfg.law);
  if (run.study) {
    json drift = json::array();
    for (double d : run.study->max_drift) drift.push_back(detail::number(d));
    doc["study"] = {{"dims", run.study->dims},
                    {"max_drift", drift},
                    {"drift_threshold", run.study->drift_threshold},
                    {"stabilized", run.study->stabilized},
                    {"monotone", run.study->monotone}};
  }
  out.write_json("spectrum.json", doc);
}

CommandResult cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& options, Outputs& out) {
  const SpectrumRun run = compute_spectra(cfg, options);
  write_spectra(cfg, run, out);
  CommandResult r;
  json top = json::array();
  for (const auto& s : run.series) {
    json first = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, s.size()); ++i) first.push_back(s.values[i]);
    top.push_back({{"dimension", s.meta.dimension}, {"leading", first}, {"converged", s.meta.converged}});
  }
  bool converged = true;
  for (const auto& s : run.series) converged = converged && s.meta.converged;
  r.summary = {{"verdict", converged ? "done" : "partial"}, {"series", top}};
  if (!converged) r.code = ExitCode::runtime;
  return r;
}

std::optional<SpectrumRun> load_spectra(const ExperimentConfig& cfg, const fs::path& dir, bool recompute) {
  const fs::path path = dir / "spectrum.json";
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream is(path, std::ios::binary);
  std::stringstream buf;
  buf << is.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error&) {
    if (recompute) return std::nullopt;
    raise(ErrorKind::validation, path.string() + " is not valid JSON; pass --recompute to regenerate it");
  }
  const std::string hash = doc.value("config_hash", "");
  if (hash != cfg.hash) {
    if (recompute) return std::nullopt;
    raise(ErrorKind::validation, "artifact " + path.string() + " carries config hash " + (hash.empty() ? "<none>" : hash) +
                                     " but the config hashes to " + cfg.hash +
                                     "; rerun spectrum or pass --recompute");
  }
  SpectrumRun run;
  run.loaded = true;
  for (const auto& entry : doc.at("series")) {
    SingularValueSeries s;
    s.values = entry.at("values").get<std::vector<double>>();
    const auto& meta = entry.at("meta");
    s.meta.dimension = meta.at("dimension").get<std::size_t>();
    s.meta.method = meta.at("method").get<std::string>() == "dense" ? SvdMethod::dense : SvdMethod::lanczos;
    s.meta.tolerance = meta.at("tolerance").is_null() ? 0.0 : meta.at("tolerance").get<double>();
    s.meta.reorthogonalization = meta.at("reorthogonalization").get<std::string>();
    s.meta.seed = meta.at("seed").get<std::uint64_t>();
    s.meta.converged = meta.at("converged").get<bool>();
    s.meta.converged_count = meta.at("converged_count").get<std::size_t>();
    s.meta.steps = meta.at("steps").get<std::size_t>();
    s.meta.source = meta.at("source").get<std::string>();
    run.series.push_back(std::move(s));
  }
  if (doc.contains("study")) {
    ConvergenceStudy study;
    study.dims = doc["study"].at("dims").get<std::vector<std::size_t>>();
    for (const auto& d : doc["study"].at("max_drift")) {
      study.max_drift.push_back(d.is_null() ? std::numeric_limits<double>::quiet_NaN() : d.get<double>());
    }
    study.drift_threshold = doc["study"].at("drift_threshold").get<double>();
    study.stabilized = doc["study"].at("stabilized").get<bool>();
    study.monotone = doc["study"].at("monotone").get<bool>();
    run.study = std::move(study);
  }
  return run;
}

IndexRange fit_window(const ExperimentConfig& cfg) {
  return cfg.analysis.window.value_or(default_window(cfg.spectrum.k));
}

CommandResult cmd_verify(const ExperimentConfig& cfg, const RunOptions& options, Outputs& out) {
  if (!cfg.law) invalid("config.analysis.predicted", "verify needs a predicted law for this model kind");
  std::optional<SpectrumRun> run = load_spectra(cfg, out.dir(), options.recompute);
  if (!run) {
    run = compute_spectra(cfg, options);
    write_spectra(cfg, *run, out);
  }
  const IndexRange window = fit_window(cfg);
  FitOptions fo;
  fo.predicted = cfg.law;
  if (cfg.analysis.fixed_alpha) fo.fixed_alpha = cfg.law->alpha;

  json fits = json::array();
  std::vector<double> deviations;
  AsymptoticFit last;
  for (const auto& s : run->series) {
    last = fit_power_law(s, window, fo);
    deviations.push_back(last.relative_deviation());
    fits.push_back({{"dimension", s.meta.dimension}, {"converged", s.meta.converged}, {"fit", detail::to_json(last)}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < deviations.size(); ++i) decreasing = decreasing && deviations[i] < deviations[i - 1];

  Verdict v;
  bool converged = true;
  for (const auto& s : run->series) converged = converged && s.meta.converged;
  v.check("converged", converged);
  if (cfg.analysis.alpha_tolerance) v.check("alpha", std::abs(last.alpha_hat - cfg.law->alpha) <= *cfg.analysis.alpha_tolerance);
  if (cfg.analysis.c_tolerance) v.check("c", last.relative_deviation() <= *cfg.analysis.c_tolerance);
  if (cfg.analysis.require_decreasing) v.check("decreasing", deviations.size() >= 2 && decreasing);
  if (cfg.analysis.require_stabilized) v.check("stabilized", run->study && run->study->stabilized);

  json doc = {{"command", "verify"},
              {"predicted", detail::to_json(*cfg.law)},
              {"window", detail::to_json(window)},
              {"fixed_alpha", cfg.analysis.fixed_alpha},
              {"fits", fits},
              {"deviation_decreasing", decreasing},
              {"spectrum_source", run->loaded ? "loaded" : "computed"},
              {"checks", v.checks},
              {"verdict", v.pass ? "pass" : "fail"}};
  json dev = json::array();
  for (double d : deviations) dev.push_back(detail::number(d));
  doc["relative_deviation"] = dev;
  if (cfg.analysis.alpha_tolerance) doc["tolerance_alpha"] = *cfg.analysis.alpha_tolerance;
  if (cfg.analysis.c_tolerance) doc["tolerance_c"] = *cfg.analysis.c_tolerance;
  if (run->study) doc["stabilized"] = run->study->stabilized;
  out.write_json("verify.json", doc);

  CommandResult r;
  r.code = v.pass ? ExitCode::pass : ExitCode::verdict_fail;
  r.summary = {{"verdict", v.pass ? "pass" : "fail"}, {"checks", v.checks}, {"c_hat", detail::number(last.c_hat)},
               {"alpha_hat", detail::number(last.alpha_hat)}};
  return r;
}

template <class F> void parallel_for(std::size_t count, unsigned threads, F body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(count);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

// Parts of a discrete localization experiment, plus the combined model.
std::vector<ModelConfig> discrete_parts(const ExperimentConfig& cfg, ModelConfig& combined) {
  std::vector<ModelConfig> parts = cfg.parts;
  if (parts.empty()) {
    for (std::size_t l = 0; l < cfg.model.discrete.terms.size(); ++l) {
      ModelConfig p = cfg.model;
      p.discrete.terms = {cfg.model.discrete.terms[l]};
      p.errors.clear();
      if (!cfg.model.errors.empty()) p.errors = {cfg.model.errors[l]};
      parts.push_back(std::move(p));
    }
    combined = cfg.model;
    return parts;
  }
  combined = parts.front();
  combined.discrete.terms.clear();
  combined.errors.clear();
  bool any_error = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.kind != ModelConfig::Kind::discrete) invalid("config.parts", "localize combines discrete parts only");
    if (p.discrete.order.alpha != combined.discrete.order.alpha) invalid("config.parts", "parts must share alpha");
    for (std::size_t l = 0; l < p.discrete.terms.size(); ++l) {
      combined.discrete.terms.push_back(p.discrete.terms[l]);
      combined.errors.push_back(p.errors.empty() ? std::nullopt : p.errors[l]);
      any_error = any_error || (!p.errors.empty() && p.errors[l]);
    }
  }
  if (!any_error) combined.errors.clear();
  try {
    combined.discrete.validate();
  } catch (const Error& e) {
    raise(ErrorKind::validation, std::string("config.parts: singular points must be distinct across parts (") + e.what() + ")");
  }
  return parts;
}

CommandResult cmd_localize(const ExperimentConfig& cfg, const RunOptions& options, Outputs& out) {
  const StudyOptions s = study_options(cfg, options);
  const auto& an = cfg.analysis;
  std::vector<SingularValueSeries> parts, parts_coarse;
  SingularValueSeries combined;
  std::optional<SingularValueSeries> combined_coarse;
  std::vector<double> slopes;
  json slope_rows = json::array();
  std::optional<PredictedLaw> combined_law = cfg.law;
  std::size_t dimension = 0;

  if (cfg.model.kind == ModelConfig::Kind::synthetic) {
    if (!cfg.parts.empty()) invalid("config.parts", "synthetic experiments take their parts from the blocks");
    if (cfg.model.blocks.size() < 2) invalid("config.model.blocks", "localize needs at least two blocks");
    dimension = operator_dimension(cfg, cfg.model, 0);
    require_spectrum(cfg, dimension);
    const Synthesis syn = build_synthesis(cfg.model);
    for (const auto& b : syn.blocks) {
      SingularValueSeries p;
      p.values = b;
      p.meta.dimension = dimension;
      p.meta.source = "block spectrum";
      p.meta.converged_count = b.size();
      parts.push_back(std::move(p));
    }
    combined = dense_svd(syn.matrix, s.dense_cap);
    combined.meta.source = "block-orthogonal synthesis";
  } else {
    if (cfg.model.kind != ModelConfig::Kind::discrete) invalid("config.model", "localize supports discrete and synthetic models");
    require_sized(cfg);
    if (cfg.op.dims.size() != 1) invalid("config.operator", "localize runs at a single N");
    dimension = cfg.op.dims.front();
    require_spectrum(cfg, dimension);
    ModelConfig combined_model;
    const std::vector<ModelConfig> models = discrete_parts(cfg, combined_model);
    if (models.size() < 2) invalid("config.parts", "localize needs at least two parts");
    combined_law = predicted_coefficient(combined_model.discrete);
    if (an.predicted) combined_law = an.predicted;

    const std::size_t n = dimension;
    const std::size_t coarse = n / 2;
    const bool with_coarse = an.trust_coarse && 4 * cfg.spectrum.k <= coarse;
    std::vector<const ModelConfig*> jobs;
    for (const auto& p : models) jobs.push_back(&p);
    jobs.push_back(&combined_model);
    std::vector<SingularValueSeries> fine(jobs.size()), rough(jobs.size());
    std::vector<SequenceSlice> slices(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) slices[i] = build_slice(*jobs[i], static_cast<std::int64_t>(2 * n - 2));
    const std::size_t tasks = jobs.size() * (with_coarse ? 2 : 1);
    parallel_for(tasks, s.threads, [&](std::size_t t) {
      const std::size_t i = t % jobs.size();
      if (t < jobs.size()) {
        fine[i] = compute_series(HankelSection::build(slices[i], n), cfg.spectrum.k, s);
      } else {
        rough[i] = compute_series(HankelSection::build(slices[i], coarse), cfg.spectrum.k, s);
      }
    });
    parts.assign(fine.begin(), fine.end() - 1);
    combined = fine.back();
    if (with_coarse) {
      parts_coarse.assign(rough.begin(), rough.end() - 1);
      combined_coarse = rough.back();
    }

    const std::size_t ck = std::min(an.cross_k, n / 4);
    if (an.cross_window.hi > static_cast<std::int64_t>(ck) || an.cross_window.lo < 1) {
      invalid("config.analysis.cross_window", "must lie inside [1, cross_k]");
    }
    for (std::size_t a = 0; a < models.size(); ++a) {
      for (std::size_t b = a + 1; b < models.size(); ++b) {
        const CrossGram g(HankelSection::build(slices[a], n), HankelSection::build(slices[b], n));
        SingularValueSeries cs = n <= s.dense_threshold ? dense_svd(g, s.dense_cap) : lanczos_topk(g, ck, s.tol, s.seed);
        if (cs.values.size() > ck) cs.values.resize(ck);
        // Values at the rounding floor carry no slope information.
        std::vector<double> v = cs.values;
        for (auto& x : v) x = std::max(x, 1e-300);
        const double slope = log_log_slope(v, an.cross_window);
        slopes.push_back(slope);
        json vals = json::array();
        for (double x : cs.values) vals.push_back(x);
        slope_rows.push_back({{"pair", {a, b}}, {"slope", slope}, {"values", vals}, {"converged", cs.meta.converged}});
      }
    }
  }

  std::vector<double> grid;
  if (an.eps_grid) {
    grid = *an.eps_grid;
  } else {
    if (combined.values.empty() || !(combined.values.back() > 0.0)) {
      invalid("config.analysis.eps_grid", "cannot derive an eps grid from a spectrum with zero values");
    }
    grid = geometric_eps_grid(combined.values.front(), combined.values.back(), 0.9);
  }
  TrustInputs trust;
  trust.combined_coarse = combined_coarse;
  trust.parts_coarse = parts_coarse;
  trust.count_range = an.count_range;
  LocalizationReport report = localization_check(parts, combined, grid, trust);
  report.cross_decay_slopes = slopes;

  Verdict v;
  v.check("trusted_points", report.trusted_count > 0);
  v.check("discrepancy", report.trusted_count > 0 && report.max_discrepancy <= an.discrepancy_max);
  for (std::size_t i = 0; i < slopes.size(); ++i) v.check("cross_slope_" + std::to_string(i), slopes[i] <= an.cross_slope_max);

  json doc = {{"command", "localize"},
              {"dimension", dimension},
              {"report", detail::to_json(report)},
              {"cross", slope_rows},
              {"discrepancy_max", an.discrepancy_max},
              {"cross_slope_max", an.cross_slope_max},
              {"checks", v.checks},
              {"verdict", v.pass ? "pass" : "fail"}};
  json part_meta = json::array();
  for (const auto& p : parts) part_meta.push_back(detail::to_json(p.meta));
  doc["parts_meta"] = part_meta;
  doc["combined_meta"] = detail::to_json(combined.meta);
  if (combined_law) {
    const IndexRange window = fit_window(cfg);
    if (window.hi <= static_cast<std::int64_t>(combined.size())) {
      FitOptions fo;
      fo.predicted = combined_law;
      if (an.fixed_alpha) fo.fixed_alpha = combined_law->alpha;
      doc["combined_fit"] = detail::to_json(fit_power_law(combined, window, fo));
    }
  }
  out.write_json("localize.json", doc);
  std::ostringstream os;
  os << out.csv_preamble({{"dimension", std::to_string(dimension)}});
  write_csv(os, report);
  out.write("localize.csv", os.str());

  CommandResult r;
  r.code = v.pass ? ExitCode::pass : ExitCode::verdict_fail;
  r.summary = {{"verdict", v.pass ? "pass" : "fail"}, {"checks", v.checks},
               {"max_discrepancy", detail::number(report.max_discrepancy)}};
  return r;
}

fs::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("HANKEL_OUT_DIR"); env && *env) return env;
  return "hankel_out";
}

} // namespace

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::domain:
  case ErrorKind::model:
  case ErrorKind::length:
  case ErrorKind::validation:
  case ErrorKind::resolution:
    return ExitCode::validation;
  default:
    return ExitCode::runtime;
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const std::string& config_json, const std::optional<std::uint64_t>& seed_override) {
  return hash_of(apply_overrides(parse_text(config_json), seed_override));
}

RunResult run_command(const std::string& command, const std::string& config_json, const RunOptions& options) {
  RunResult result;
  const std::string started = timestamp();
  json record = {{"command", command}, {"version", tool_version}, {"started", started}};
  try {
    if (command != "gen" && command != "spectrum" && command != "verify" && command != "localize") {
      raise(ErrorKind::validation, "unknown command \"" + command + "\" (expected gen, spectrum, verify or localize)");
    }
    const json config = apply_overrides(parse_text(config_json), options.seed);
    ExperimentConfig cfg;
    try {
      cfg = parse_config(config);
    } catch (const Error& e) {
      // Model-level inconsistencies found while reading the config are configuration errors.
      if (e.kind() == ErrorKind::validation) throw;
      raise(ErrorKind::validation, std::string("config rejected: ") + e.what());
    }
    result.config_hash = cfg.hash;
    Outputs out(resolve_out_dir(cfg, options), cfg.hash);

    CommandResult r;
    try {
      if (command == "gen") {
        r = cmd_gen(cfg, out);
      } else if (command == "spectrum") {
        r = cmd_spectrum(cfg, options, out);
      } else if (command == "verify") {
        r = cmd_verify(cfg, options, out);
      } else {
        r = cmd_localize(cfg, options, out);
      }
    } catch (const Error& e) {
      raise(e.kind(), command + ": " + e.what());
    }
    result.exit_code = static_cast<int>(r.code);
    json summary = r.summary;
    summary["command"] = command;
    summary["config_hash"] = cfg.hash;
    summary["version"] = tool_version;
    summary["exit_code"] = result.exit_code;
    summary["outputs"] = out.files();
    result.summary = summary.dump();

    record["config_hash"] = cfg.hash;
    record["outputs"] = out.files();
    record["summary"] = r.summary;
    record["exit_code"] = result.exit_code;
    record["finished"] = timestamp();
    const fs::path record_path = out.dir() / "run_record.json";
    std::ofstream os(record_path, std::ios::binary | std::ios::trunc);
    os << record.dump(2) << "\n";
    if (!os) raise(ErrorKind::io, "cannot write " + record_path.string());
    result.outputs = out.files();
    result.outputs.push_back(record_path.string());
  } catch (const Error& e) {
    result.exit_code = static_cast<int>(exit_code_for(e.kind()));
    result.error = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    result.exit_code = static_cast<int>(ExitCode::runtime);
    result.error = std::string("runtime error: ") + e.what();
  }
  if (!result.error.empty()) {
    result.summary = json({{"command", command}, {"version", tool_version}, {"exit_code", result.exit_code},
                           {"error", result.error}})
                         .dump();
  }
  return result;
}

} // namespace hankel
