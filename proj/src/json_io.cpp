#include "detail/json_io.hpp"

#include "hankel/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hankel::detail {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  raise(ErrorKind::validation, where + ": " + what);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

std::string index(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

} // namespace

void require_object(const json& value, const std::string& where) {
  if (!value.is_object()) invalid(where, "expected an object");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(obj, where);
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) invalid(join(where, item.key()), "unknown field");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  require_object(obj, where);
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(join(where, key), "missing required field");
  return *it;
}

double get_number(const json& value, const std::string& where) {
  if (!value.is_number()) invalid(where, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) invalid(where, "expected a finite number");
  return x;
}

std::int64_t get_integer(const json& value, const std::string& where) {
  if (!value.is_number_integer()) invalid(where, "expected an integer");
  return value.get<std::int64_t>();
}

std::uint64_t get_unsigned(const json& value, const std::string& where) {
  if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<std::int64_t>() < 0)) {
    invalid(where, "expected a nonnegative integer");
  }
  return value.get<std::uint64_t>();
}

std::string get_string(const json& value, const std::string& where) {
  if (!value.is_string()) invalid(where, "expected a string");
  return value.get<std::string>();
}

bool get_bool(const json& value, const std::string& where) {
  if (!value.is_boolean()) invalid(where, "expected true or false");
  return value.get<bool>();
}

complex complex_from_json(const json& value, const std::string& where) {
  if (value.is_number()) return {get_number(value, where), 0.0};
  if (!value.is_array() || value.size() != 2) invalid(where, "expected a complex number [re, im]");
  return {get_number(value[0], index(where, 0)), get_number(value[1], index(where, 1))};
}

json to_json(complex z) { return json::array({number(z.real()), number(z.imag())}); }

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Cutoffs cutoffs_from_json(const json& value, const std::string& where) {
  reject_unknown(value, {"c1", "c2", "C1", "C2"}, where);
  Cutoffs c;
  if (value.contains("c1")) c.c1 = get_number(value["c1"], join(where, "c1"));
  if (value.contains("c2")) c.c2 = get_number(value["c2"], join(where, "c2"));
  if (value.contains("C1")) c.C1 = get_number(value["C1"], join(where, "C1"));
  if (value.contains("C2")) c.C2 = get_number(value["C2"], join(where, "C2"));
  return c;
}

DiscreteModel discrete_model_from_json(const json& value, const std::string& where) {
  // "error" entries on terms belong to the experiment layer and are read there.
  reject_unknown(value, {"kind", "alpha", "terms"}, where);
  DiscreteModel model;
  model.order = AsymptoticOrder::from_alpha(get_number(require(value, "alpha", where), join(where, "alpha")));
  const json& terms = require(value, "terms", where);
  const std::string tw = join(where, "terms");
  if (!terms.is_array()) invalid(tw, "expected an array");
  if (terms.empty()) invalid(tw, "at least one term is required");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string w = index(tw, i);
    reject_unknown(terms[i], {"zeta", "b", "error"}, w);
    DiscreteTerm term;
    term.zeta = complex_from_json(require(terms[i], "zeta", w), join(w, "zeta"));
    if (terms[i].contains("b")) term.b = complex_from_json(terms[i]["b"], join(w, "b"));
    model.terms.push_back(term);
  }
  return model;
}

ContinuousModel continuous_model_from_json(const json& value, const std::string& where) {
  reject_unknown(value, {"kind", "alpha", "b0", "terms", "local_bump", "cutoffs", "exponentials"}, where);
  ContinuousModel model;
  model.order = AsymptoticOrder::from_alpha(get_number(require(value, "alpha", where), join(where, "alpha")));
  if (value.contains("b0")) model.b0 = complex_from_json(value["b0"], join(where, "b0"));
  if (value.contains("terms")) {
    const json& terms = value["terms"];
    const std::string tw = join(where, "terms");
    if (!terms.is_array()) invalid(tw, "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string w = index(tw, i);
      reject_unknown(terms[i], {"a", "b"}, w);
      LineTerm term;
      term.a = get_number(require(terms[i], "a", w), join(w, "a"));
      if (terms[i].contains("b")) term.b = complex_from_json(terms[i]["b"], join(w, "b"));
      model.terms.push_back(term);
    }
  }
  if (value.contains("local_bump")) {
    const std::string w = join(where, "local_bump");
    const json& b = value["local_bump"];
    reject_unknown(b, {"t0", "m", "b"}, w);
    LocalBump bump;
    bump.t0 = get_number(require(b, "t0", w), join(w, "t0"));
    bump.m = static_cast<int>(get_integer(require(b, "m", w), join(w, "m")));
    if (b.contains("b")) bump.b = complex_from_json(b["b"], join(w, "b"));
    model.local_bump = bump;
  }
  if (value.contains("cutoffs")) model.cutoffs = cutoffs_from_json(value["cutoffs"], join(where, "cutoffs"));
  return model;
}

MeshSpec mesh_from_json(const json& value, MeshSpec mesh, const std::string& where) {
  reject_unknown(value, {"t_min", "t_max", "panels", "nodes_per_panel", "grading"}, where);
  if (value.contains("t_min")) mesh.t_min = get_number(value["t_min"], join(where, "t_min"));
  if (value.contains("t_max")) mesh.t_max = get_number(value["t_max"], join(where, "t_max"));
  if (value.contains("panels")) mesh.panels = get_unsigned(value["panels"], join(where, "panels"));
  if (value.contains("nodes_per_panel")) {
    mesh.nodes_per_panel = get_unsigned(value["nodes_per_panel"], join(where, "nodes_per_panel"));
  }
  if (value.contains("grading")) {
    const std::string g = get_string(value["grading"], join(where, "grading"));
    if (g == "logarithmic") {
      mesh.grading = MeshSpec::Grading::logarithmic;
    } else if (g == "uniform") {
      mesh.grading = MeshSpec::Grading::uniform;
    } else {
      invalid(join(where, "grading"), "expected \"logarithmic\" or \"uniform\"");
    }
  }
  return mesh;
}

json to_json(const DiscreteModel& model) {
  json terms = json::array();
  for (const auto& t : model.terms) terms.push_back({{"zeta", to_json(t.zeta)}, {"b", to_json(t.b)}});
  return {{"kind", "discrete"}, {"alpha", model.order.alpha}, {"terms", terms}};
}

json to_json(const ContinuousModel& model) {
  json terms = json::array();
  for (const auto& t : model.terms) terms.push_back({{"a", t.a}, {"b", to_json(t.b)}});
  json out = {{"kind", "continuous"},
              {"alpha", model.order.alpha},
              {"b0", to_json(model.b0)},
              {"terms", terms},
              {"cutoffs",
               {{"c1", model.cutoffs.c1}, {"c2", model.cutoffs.c2}, {"C1", model.cutoffs.C1}, {"C2", model.cutoffs.C2}}}};
  if (model.local_bump) {
    out["local_bump"] = {{"t0", model.local_bump->t0}, {"m", model.local_bump->m}, {"b", to_json(model.local_bump->b)}};
  }
  return out;
}

json to_json(const MeshSpec& mesh) {
  return {{"t_min", mesh.t_min},
          {"t_max", mesh.t_max},
          {"panels", mesh.panels},
          {"nodes_per_panel", mesh.nodes_per_panel},
          {"grading", mesh.grading == MeshSpec::Grading::logarithmic ? "logarithmic" : "uniform"}};
}

json to_json(const PredictedLaw& law) { return {{"c", number(law.c)}, {"alpha", number(law.alpha)}}; }

json to_json(const SeriesMeta& meta) {
  return {{"dimension", meta.dimension},
          {"method", to_string(meta.method)},
          {"tolerance", number(meta.tolerance)},
          {"reorthogonalization", meta.reorthogonalization},
          {"seed", meta.seed},
          {"converged", meta.converged},
          {"converged_count", meta.converged_count},
          {"steps", meta.steps},
          {"source", meta.source}};
}

json to_json(const IndexRange& range) { return json::array({range.lo, range.hi}); }

json to_json(const AsymptoticFit& fit) {
  json out = {{"alpha_hat", number(fit.alpha_hat)},
              {"c_hat", number(fit.c_hat)},
              {"c_hat_free", number(fit.c_hat_free)},
              {"window", to_json(fit.window)},
              {"residual_rms", number(fit.residual_rms)},
              {"fixed_alpha", fit.fixed_alpha}};
  if (fit.predicted) {
    out["predicted"] = to_json(*fit.predicted);
    out["relative_deviation"] = number(fit.relative_deviation());
  }
  return out;
}

json to_json(const DecayCertificate& certificate) {
  json r = json::array();
  for (double v : certificate.r) r.push_back(number(v));
  return {{"window", to_json(certificate.window)},
          {"alpha", certificate.alpha},
          {"m", certificate.m},
          {"delta", certificate.thresholds.delta},
          {"quartile_ratio", certificate.thresholds.quartile_ratio},
          {"j", certificate.j},
          {"r", r},
          {"slope", number(certificate.slope)},
          {"first_quartile_max", number(certificate.first_quartile_max)},
          {"last_quartile_max", number(certificate.last_quartile_max)},
          {"verdict", certificate.pass ? "pass" : "fail"}};
}

json to_json(const LocalizationReport& report) {
  json rows = json::array();
  for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
    json parts = json::array();
    for (const auto& counts : report.part_counts) parts.push_back(counts[e]);
    rows.push_back({{"eps", report.eps_grid[e]},
                    {"combined", report.combined_counts[e]},
                    {"summed", report.summed_counts[e]},
                    {"parts", parts},
                    {"trusted", static_cast<bool>(report.trusted[e])},
                    {"discrepancy", number(report.discrepancy[e])}});
  }
  json slopes = json::array();
  for (double s : report.cross_decay_slopes) slopes.push_back(number(s));
  return {{"rows", rows},
          {"cross_decay_slopes", slopes},
          {"max_discrepancy", number(report.max_discrepancy)},
          {"trusted_count", report.trusted_count}};
}

} // namespace hankel::detail
