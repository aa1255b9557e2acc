#include "clsnet/clsnet.h"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "clsnet/acceptance.hpp"
#include "clsnet/commands.hpp"
#include "clsnet/evolve.hpp"
#include "clsnet/lattice.hpp"
#include "clsnet/scenario.hpp"
#include "clsnet/spectral.hpp"

struct clsnet_scenario {
  clsnet::ScenarioConfig config;
};

struct clsnet_hamiltonian {
  clsnet::Matrix matrix;
};

namespace {

thread_local std::string g_last_error;

clsnet_status to_status(clsnet::ErrorCode code) {
  using clsnet::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return CLSNET_ERR_INVALID_ARGUMENT;
    case ErrorCode::out_of_range: return CLSNET_ERR_OUT_OF_RANGE;
    case ErrorCode::not_hermitian: return CLSNET_ERR_NOT_HERMITIAN;
    case ErrorCode::symmetry_violated: return CLSNET_ERR_SYMMETRY_VIOLATED;
    case ErrorCode::step_underflow: return CLSNET_ERR_STEP_UNDERFLOW;
    case ErrorCode::non_finite: return CLSNET_ERR_NON_FINITE;
    case ErrorCode::schedule_conflict: return CLSNET_ERR_SCHEDULE_CONFLICT;
    case ErrorCode::no_route: return CLSNET_ERR_NO_ROUTE;
    case ErrorCode::unschedulable: return CLSNET_ERR_UNSCHEDULABLE;
    case ErrorCode::config: return CLSNET_ERR_CONFIG;
  }
  return CLSNET_ERR_INTERNAL;
}

template <class F>
clsnet_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return CLSNET_OK;
  } catch (const clsnet::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CLSNET_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CLSNET_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw clsnet::Error(clsnet::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void hand_out(char** out, const std::string& s) {
  if (out) *out = duplicate(s);
}

clsnet::StateVector read_state(std::size_t n, const double* re, const double* im) {
  clsnet::CVector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    v(static_cast<Eigen::Index>(i)) = clsnet::Complex(re[i], im ? im[i] : 0.0);
  }
  return clsnet::StateVector::normalized(std::move(v));
}

}  // namespace

extern "C" {

const char* clsnet_version(void) { return "0.1.0"; }

const char* clsnet_status_name(clsnet_status status) {
  switch (status) {
    case CLSNET_OK: return "ok";
    case CLSNET_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CLSNET_ERR_OUT_OF_RANGE: return "out_of_range";
    case CLSNET_ERR_NOT_HERMITIAN: return "not_hermitian";
    case CLSNET_ERR_SYMMETRY_VIOLATED: return "symmetry_violated";
    case CLSNET_ERR_STEP_UNDERFLOW: return "step_underflow";
    case CLSNET_ERR_NON_FINITE: return "non_finite";
    case CLSNET_ERR_SCHEDULE_CONFLICT: return "schedule_conflict";
    case CLSNET_ERR_NO_ROUTE: return "no_route";
    case CLSNET_ERR_UNSCHEDULABLE: return "unschedulable";
    case CLSNET_ERR_CONFIG: return "config";
    case CLSNET_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int clsnet_status_is_numerical(clsnet_status status) {
  return status == CLSNET_ERR_NOT_HERMITIAN || status == CLSNET_ERR_STEP_UNDERFLOW ||
         status == CLSNET_ERR_NON_FINITE;
}

const char* clsnet_last_error(void) { return g_last_error.c_str(); }

void clsnet_string_free(char* s) { std::free(s); }

clsnet_status clsnet_scenario_load(const char* path, clsnet_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new clsnet_scenario{clsnet::load_scenario(path)};
  });
}

clsnet_status clsnet_scenario_parse(const char* text, const char* source_name, clsnet_scenario** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new clsnet_scenario{clsnet::parse_scenario(text, source_name ? source_name : "config")};
  });
}

void clsnet_scenario_free(clsnet_scenario* scenario) { delete scenario; }

clsnet_status clsnet_scenario_set_seed(clsnet_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario, "scenario");
    scenario->config.seed = seed;
  });
}

clsnet_status clsnet_scenario_set_output_dir(clsnet_scenario* scenario, const char* dir) {
  return guarded([&] {
    require(scenario, "scenario");
    require(dir, "dir");
    scenario->config.output_dir = dir;
  });
}

clsnet_status clsnet_scenario_set_tolerance(clsnet_scenario* scenario, double tol) {
  return guarded([&] {
    require(scenario, "scenario");
    if (!(tol >= 1e-14 && tol <= 1e-6)) {
      throw clsnet::Error(clsnet::ErrorCode::config, "--tol must lie in [1e-14, 1e-6]");
    }
    scenario->config.tol = tol;
  });
}

clsnet_status clsnet_scenario_emit(const clsnet_scenario* scenario, char** yaml) {
  return guarded([&] {
    require(scenario, "scenario");
    require(yaml, "yaml");
    hand_out(yaml, clsnet::emit_scenario(scenario->config));
  });
}

clsnet_status clsnet_scenario_digest(const clsnet_scenario* scenario, char** digest) {
  return guarded([&] {
    require(scenario, "scenario");
    require(digest, "digest");
    hand_out(digest, clsnet::scenario_digest(scenario->config));
  });
}

clsnet_status clsnet_scenario_action(const clsnet_scenario* scenario, char** action) {
  return guarded([&] {
    require(scenario, "scenario");
    require(action, "action");
    hand_out(action, scenario->config.action);
  });
}

clsnet_status clsnet_run(const clsnet_scenario* scenario, const char* command, char** report) {
  return guarded([&] {
    require(scenario, "scenario");
    require(command, "command");
    const auto result = clsnet::run_command(command, scenario->config);
    hand_out(report, result.report);
  });
}

clsnet_status clsnet_verify(const char* selector, int inject_fault, clsnet_verify_callback callback, void* user,
                            int* all_passed, char** report_json) {
  return guarded([&] {
    clsnet::AcceptanceOptions opts;
    opts.selection = clsnet::parse_selector(selector ? selector : "");
    if (inject_fault != 0 && inject_fault != 1) {
      throw clsnet::Error(clsnet::ErrorCode::invalid_argument, "unknown fault " + std::to_string(inject_fault));
    }
    opts.inject_propagator_fault = inject_fault == 1;
    if (callback) {
      opts.on_result = [&](const clsnet::CriterionResult& r) {
        callback(r.id, r.passed ? 1 : 0, clsnet::format_result_line(r).c_str(), user);
      };
    }
    const auto results = clsnet::run_acceptance(opts);
    bool all = true;
    for (const auto& r : results) all = all && r.passed;
    if (all_passed) *all_passed = all ? 1 : 0;
    hand_out(report_json, clsnet::acceptance_json(results));
  });
}

clsnet_status clsnet_hamiltonian_star(const double couplings[4], const double potentials[5],
                                      clsnet_hamiltonian** out) {
  return guarded([&] {
    require(couplings, "couplings");
    require(potentials, "potentials");
    require(out, "out");
    std::array<double, 4> j{};
    std::array<double, 5> v{};
    std::copy_n(couplings, 4, j.begin());
    std::copy_n(potentials, 5, v.begin());
    *out = new clsnet_hamiltonian{clsnet::build_star(j, v).base()};
  });
}

clsnet_status clsnet_hamiltonian_seven(const double couplings[6], const double potentials[7],
                                       clsnet_hamiltonian** out) {
  return guarded([&] {
    require(couplings, "couplings");
    require(potentials, "potentials");
    require(out, "out");
    std::array<double, 6> j{};
    std::array<double, 7> v{};
    std::copy_n(couplings, 6, j.begin());
    std::copy_n(potentials, 7, v.begin());
    *out = new clsnet_hamiltonian{clsnet::build_seven(j, v).base()};
  });
}

clsnet_status clsnet_hamiltonian_dense(size_t n, const double* row_major, clsnet_hamiltonian** out) {
  return guarded([&] {
    require(row_major, "row_major");
    require(out, "out");
    if (n == 0) throw clsnet::Error(clsnet::ErrorCode::invalid_argument, "empty Hamiltonian");
    const auto m = static_cast<Eigen::Index>(n);
    clsnet::Matrix h = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        row_major, m, m);
    *out = new clsnet_hamiltonian{clsnet::TimedHamiltonian(h).base()};
  });
}

void clsnet_hamiltonian_free(clsnet_hamiltonian* h) { delete h; }

size_t clsnet_hamiltonian_dimension(const clsnet_hamiltonian* h) {
  return h ? static_cast<size_t>(h->matrix.rows()) : 0;
}

clsnet_status clsnet_spectrum(const clsnet_hamiltonian* h, double* eigenvalues) {
  return guarded([&] {
    require(h, "h");
    require(eigenvalues, "eigenvalues");
    const clsnet::Vector ev = clsnet::spectrum(h->matrix).eigenvalues;
    std::copy(ev.data(), ev.data() + ev.size(), eigenvalues);
  });
}

clsnet_status clsnet_evolve(const clsnet_hamiltonian* h, const double* psi_re, const double* psi_im, double t,
                            double* out_re, double* out_im) {
  return guarded([&] {
    require(h, "h");
    require(psi_re, "psi_re");
    require(out_re, "out_re");
    require(out_im, "out_im");
    const std::size_t n = static_cast<std::size_t>(h->matrix.rows());
    const auto psi = clsnet::evolve_static(h->matrix, read_state(n, psi_re, psi_im), t);
    for (std::size_t i = 0; i < n; ++i) {
      out_re[i] = psi[i].real();
      out_im[i] = psi[i].imag();
    }
  });
}

clsnet_status clsnet_fidelity(size_t n, const double* a_re, const double* a_im, const double* b_re,
                              const double* b_im, double* out) {
  return guarded([&] {
    require(a_re, "a_re");
    require(b_re, "b_re");
    require(out, "out");
    *out = clsnet::fidelity(read_state(n, a_re, a_im), read_state(n, b_re, b_im));
  });
}

}  // extern "C"
