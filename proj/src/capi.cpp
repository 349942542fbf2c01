#include "hankel/hankel.h"

#include "detail/json_io.hpp"
#include "hankel/asymptotics.hpp"
#include "hankel/error.hpp"
#include "hankel/operators.hpp"
#include "hankel/pipeline.hpp"
#include "hankel/sequences.hpp"
#include "hankel/spectra.hpp"
#include "hankel/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct hk_section {
  hankel::HankelSection section;
};

struct hk_discretization {
  hankel::IntegralDiscretization discretization;
};

struct hk_series {
  hankel::SingularValueSeries series;
};

namespace {

thread_local std::string last_error;

hk_status status_for(hankel::ErrorKind kind) {
  switch (kind) {
  case hankel::ErrorKind::domain: return HK_ERR_DOMAIN;
  case hankel::ErrorKind::model: return HK_ERR_MODEL;
  case hankel::ErrorKind::length: return HK_ERR_LENGTH;
  case hankel::ErrorKind::convergence: return HK_ERR_CONVERGENCE;
  case hankel::ErrorKind::validation: return HK_ERR_VALIDATION;
  case hankel::ErrorKind::resolution: return HK_ERR_RESOLUTION;
  case hankel::ErrorKind::io: return HK_ERR_IO;
  default: return HK_ERR_INTERNAL;
  }
}

template <class F> hk_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HK_OK;
  } catch (const hankel::Error& e) {
    last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HK_ERR_INTERNAL;
  }
}

hk_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return HK_ERR_NULL_ARGUMENT;
}

const hankel::complex* as_complex(const double* p) { return reinterpret_cast<const hankel::complex*>(p); }
hankel::complex* as_complex(double* p) { return reinterpret_cast<hankel::complex*>(p); }

} // namespace

extern "C" {

const char* hk_version(void) { return hankel::tool_version; }

const char* hk_status_name(hk_status status) {
  switch (status) {
  case HK_OK: return "ok";
  case HK_ERR_DOMAIN: return "domain";
  case HK_ERR_MODEL: return "model";
  case HK_ERR_LENGTH: return "length";
  case HK_ERR_CONVERGENCE: return "convergence";
  case HK_ERR_VALIDATION: return "validation";
  case HK_ERR_RESOLUTION: return "resolution";
  case HK_ERR_IO: return "io";
  case HK_ERR_INTERNAL: return "internal";
  case HK_ERR_NULL_ARGUMENT: return "null argument";
  }
  return "unknown";
}

const char* hk_last_error(void) { return last_error.c_str(); }

hk_status hk_v_coefficient(double alpha, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = hankel::v_coefficient(alpha); });
}

hk_status hk_weyl_reference(int m, double t0, int64_t n, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = hankel::weyl_reference(m, t0, n); });
}

hk_status hk_model_sequence(double alpha, int64_t j, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    if (j < 0) hankel::raise(hankel::ErrorKind::domain, "j must be nonnegative");
    *out = hankel::model_sequence(alpha, j);
  });
}

hk_status hk_sigma_eval(double alpha, double theta, double precision, double* re, double* im) {
  if (!re || !im) return null_argument("re/im");
  return guarded([&] {
    const auto z = hankel::sigma_eval(alpha, theta, precision);
    *re = z.real();
    *im = z.imag();
  });
}

hk_status hk_tau_eval(int m, double t0, double x, double* re, double* im) {
  if (!re || !im) return null_argument("re/im");
  return guarded([&] {
    const auto z = hankel::tau_eval(m, t0, x);
    *re = z.real();
    *im = z.imag();
  });
}

hk_status hk_section_create(const double* gen, size_t len, size_t n, hk_section** out) {
  if (!gen || !out) return null_argument("gen/out");
  *out = nullptr;
  return guarded([&] {
    std::vector<hankel::complex> values(as_complex(gen), as_complex(gen) + len);
    *out = new hk_section{hankel::HankelSection::build(hankel::custom_slice(std::move(values), "C API"), n)};
  });
}

hk_status hk_section_create_model(double alpha, size_t n, hk_section** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    if (n < 2) hankel::raise(hankel::ErrorKind::length, "section needs n >= 2");
    hankel::check_alpha(alpha);
    *out = new hk_section{hankel::HankelSection::build(hankel::model_slice(alpha, static_cast<int64_t>(2 * n - 2)), n)};
  });
}

size_t hk_section_dimension(const hk_section* section) { return section ? section->section.n() : 0; }

hk_status hk_section_apply(const hk_section* section, const double* u, double* out) {
  if (!section || !u || !out) return null_argument("section/u/out");
  return guarded([&] { section->section.apply(as_complex(u), as_complex(out)); });
}

hk_status hk_section_apply_adjoint(const hk_section* section, const double* u, double* out) {
  if (!section || !u || !out) return null_argument("section/u/out");
  return guarded([&] { section->section.apply_adjoint(as_complex(u), as_complex(out)); });
}

void hk_section_free(hk_section* section) { delete section; }

hk_status hk_discretize_bump(int m, double t0, size_t panels, size_t nodes_per_panel, hk_discretization** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto spec = hankel::KernelSpec::pure_bump(m, t0);
    *out = new hk_discretization{hankel::discretize_kernel(spec, 0.0, t0, panels, nodes_per_panel)};
  });
}

hk_status hk_discretize_model(const char* model_json, const char* mesh_json, hk_discretization** out) {
  if (!model_json || !out) return null_argument("model_json/out");
  *out = nullptr;
  return guarded([&] {
    using hankel::detail::json;
    json model, mesh;
    try {
      model = json::parse(model_json);
      if (mesh_json) mesh = json::parse(mesh_json);
    } catch (const json::parse_error& e) {
      hankel::raise(hankel::ErrorKind::validation, std::string("invalid JSON: ") + e.what());
    }
    const auto cm = hankel::detail::continuous_model_from_json(model, "model");
    cm.validate();
    const auto spec = hankel::KernelSpec::from_model(cm);
    auto m = hankel::MeshSpec::defaults_for(spec);
    if (mesh_json) m = hankel::detail::mesh_from_json(mesh, m, "mesh");
    *out = new hk_discretization{hankel::discretize_kernel(spec, m)};
  });
}

size_t hk_discretization_dimension(const hk_discretization* d) { return d ? d->discretization.rows() : 0; }

void hk_discretization_free(hk_discretization* d) { delete d; }

hk_status hk_series_dense_section(const hk_section* section, size_t dense_cap, hk_series** out) {
  if (!section || !out) return null_argument("section/out");
  *out = nullptr;
  return guarded([&] {
    *out = new hk_series{hankel::dense_svd(section->section, dense_cap ? dense_cap : hankel::default_dense_cap)};
  });
}

hk_status hk_series_dense_discretization(const hk_discretization* d, size_t dense_cap, hk_series** out) {
  if (!d || !out) return null_argument("discretization/out");
  *out = nullptr;
  return guarded([&] {
    *out = new hk_series{hankel::dense_svd(d->discretization, dense_cap ? dense_cap : hankel::default_dense_cap)};
  });
}

hk_status hk_series_lanczos_section(const hk_section* section, size_t k, double tol, uint64_t seed, hk_series** out) {
  if (!section || !out) return null_argument("section/out");
  *out = nullptr;
  return guarded([&] { *out = new hk_series{hankel::lanczos_topk(section->section, k, tol, seed)}; });
}

size_t hk_series_size(const hk_series* series) { return series ? series->series.size() : 0; }

hk_status hk_series_values(const hk_series* series, double* out, size_t capacity, size_t* copied) {
  if (!series || (!out && capacity > 0)) return null_argument("series/out");
  const size_t count = std::min(capacity, series->series.size());
  if (count) std::memcpy(out, series->series.values.data(), count * sizeof(double));
  if (copied) *copied = count;
  last_error.clear();
  return HK_OK;
}

int hk_series_converged(const hk_series* series) { return series && series->series.meta.converged ? 1 : 0; }

hk_status hk_series_count_above(const hk_series* series, double eps, size_t* out) {
  if (!series || !out) return null_argument("series/out");
  return guarded([&] { *out = hankel::counting_function(series->series, eps); });
}

hk_status hk_series_fit(const hk_series* series, int64_t lo, int64_t hi, double fixed_alpha, double* alpha_hat,
                        double* c_hat) {
  if (!series || !alpha_hat || !c_hat) return null_argument("series/alpha_hat/c_hat");
  return guarded([&] {
    hankel::FitOptions options;
    if (std::isfinite(fixed_alpha)) options.fixed_alpha = fixed_alpha;
    const auto fit = hankel::fit_power_law(series->series, {lo, hi}, options);
    *alpha_hat = fit.alpha_hat;
    *c_hat = fit.c_hat;
  });
}

void hk_series_free(hk_series* series) { delete series; }

void hk_run_options_init(hk_run_options* options) {
  if (!options) return;
  options->out_dir = nullptr;
  options->threads = 1;
  options->dense_cap = 0;
  options->has_seed = 0;
  options->seed = 0;
  options->recompute = 0;
}

hk_status hk_run(const char* command, const char* config_json, const hk_run_options* options, int* exit_code,
                 char** summary_json) {
  if (!command || !config_json || !exit_code) return null_argument("command/config_json/exit_code");
  if (summary_json) *summary_json = nullptr;
  std::string error;
  const hk_status status = guarded([&] {
    hankel::RunOptions ro;
    if (options) {
      if (options->out_dir) ro.out_dir = options->out_dir;
      ro.threads = options->threads ? options->threads : 1;
      if (options->dense_cap) ro.dense_cap = options->dense_cap;
      if (options->has_seed) ro.seed = options->seed;
      ro.recompute = options->recompute != 0;
    }
    const auto result = hankel::run_command(command, config_json, ro);
    *exit_code = result.exit_code;
    error = result.error;
    if (summary_json) {
      char* copy = static_cast<char*>(std::malloc(result.summary.size() + 1));
      if (!copy) throw std::bad_alloc();
      std::memcpy(copy, result.summary.c_str(), result.summary.size() + 1);
      *summary_json = copy;
    }
  });
  if (status == HK_OK) last_error = error;
  return status;
}

void hk_string_free(char* s) { std::free(s); }

} // extern "C"
