// Copyright 2026 The lodem Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lodem/lodem.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "model.hpp"
#include "network.hpp"
#include "pipeline.hpp"
#include "solver.hpp"

struct lodem_config {
  lodem::RunConfig config;
};
struct lodem_network {
  lodem::Network net;
};
struct lodem_tensor {
  lodem::LodTensor tensor;
};
struct lodem_counts {
  lodem::CountObservations obs;
};

namespace {

thread_local std::string last_error;

lodem_status StatusOf(lodem::ErrorKind kind) {
  switch (kind) {
    case lodem::ErrorKind::kParse: return LODEM_ERR_PARSE;
    case lodem::ErrorKind::kIntegrity: return LODEM_ERR_INTEGRITY;
    case lodem::ErrorKind::kConfig: return LODEM_ERR_CONFIG;
    case lodem::ErrorKind::kIo: return LODEM_ERR_IO;
    case lodem::ErrorKind::kNumeric: return LODEM_ERR_NUMERIC;
    case lodem::ErrorKind::kArgument: return LODEM_ERR_ARGUMENT;
  }
  return LODEM_ERR_INTERNAL;
}

template <typename F>
lodem_status Guard(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const lodem::Error& e) {
    last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return LODEM_ERR_INTERNAL;
}

void Need(const void* p, const char* what) {
  if (!p) lodem::Fail(lodem::ErrorKind::kArgument, std::string(what) + " is null");
}

lodem::Weights ToWeights(const lodem_weights& w) {
  lodem::Weights out;
  out.tc = w.tc;
  out.p = w.p;
  out.c = w.c;
  out.k = w.k;
  out.tv = w.tv;
  return out;
}

template <typename T, typename... Args>
lodem_status Emit(T** out, Args&&... args) {
  *out = new T{std::forward<Args>(args)...};
  return LODEM_OK;
}

}  // namespace

extern "C" {

const char* lodem_version(void) { return "0.1.0"; }

const char* lodem_last_error(void) { return last_error.c_str(); }

const char* lodem_status_name(lodem_status status) {
  switch (status) {
    case LODEM_OK: return "ok";
    case LODEM_NOT_CONVERGED: return "not converged";
    case LODEM_ERR_CONFIG: return "configuration error";
    case LODEM_ERR_PARSE: return "parse error";
    case LODEM_ERR_INTEGRITY: return "integrity error";
    case LODEM_ERR_IO: return "i/o error";
    case LODEM_ERR_NUMERIC: return "numeric error";
    case LODEM_ERR_ARGUMENT: return "invalid argument";
    case LODEM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

lodem_status lodem_config_new(lodem_config** out) {
  return Guard([&] {
    Need(out, "out");
    return Emit(out);
  });
}

lodem_status lodem_config_load(const char* path, lodem_config** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    return Emit(out, lodem::RunConfig::Load(path));
  });
}

lodem_status lodem_config_set(lodem_config* config, const char* assignment) {
  return Guard([&] {
    Need(config, "config");
    Need(assignment, "assignment");
    config->config.Set(assignment);
    return LODEM_OK;
  });
}

void lodem_config_free(lodem_config* config) { delete config; }

size_t lodem_config_key_count(void) { return lodem::ConfigKeys().size(); }

lodem_status lodem_config_key(size_t index, const char** name,
                              const char** default_value, const char** help) {
  return Guard([&] {
    const auto& keys = lodem::ConfigKeys();
    if (index >= keys.size()) {
      lodem::Fail(lodem::ErrorKind::kArgument, "key index out of range");
    }
    // Registry strings are literals, hence NUL-terminated.
    if (name) *name = keys[index].name.data();
    if (default_value) *default_value = keys[index].default_value.data();
    if (help) *help = keys[index].help.data();
    return LODEM_OK;
  });
}

lodem_status lodem_run(const char* command, const lodem_config* config) {
  return Guard([&] {
    Need(command, "command");
    Need(config, "config");
    const auto status = lodem::RunCommand(command, config->config);
    if (status == lodem::RunStatus::kNotConverged) {
      last_error = "solver reached the iteration limit before converging";
      return LODEM_NOT_CONVERGED;
    }
    return LODEM_OK;
  });
}

lodem_status lodem_network_load(const char* nodes_csv, const char* links_csv,
                                const char* scanners_csv, lodem_network** out) {
  return Guard([&] {
    Need(nodes_csv, "nodes_csv");
    Need(links_csv, "links_csv");
    Need(scanners_csv, "scanners_csv");
    Need(out, "out");
    return Emit(out, lodem::Network::Load(nodes_csv, links_csv, scanners_csv));
  });
}

void lodem_network_free(lodem_network* network) { delete network; }

size_t lodem_network_scanner_count(const lodem_network* network) {
  return network ? network->net.scanner_count() : 0;
}

size_t lodem_network_link_count(const lodem_network* network) {
  return network ? network->net.link_count() : 0;
}

lodem_status lodem_tensor_load(const lodem_network* network, const char* path,
                               lodem_tensor** out) {
  return Guard([&] {
    Need(network, "network");
    Need(path, "path");
    Need(out, "out");
    return Emit(out, lodem::LoadTensor(network->net, path));
  });
}

lodem_status lodem_tensor_save(const lodem_network* network,
                               const lodem_tensor* tensor, const char* path) {
  return Guard([&] {
    Need(network, "network");
    Need(tensor, "tensor");
    Need(path, "path");
    lodem::WriteTensor(network->net, tensor->tensor, path);
    return LODEM_OK;
  });
}

void lodem_tensor_free(lodem_tensor* tensor) { delete tensor; }

size_t lodem_tensor_nnz(const lodem_tensor* tensor) {
  return tensor ? tensor->tensor.nnz() : 0;
}

double lodem_tensor_sum(const lodem_tensor* tensor) {
  return tensor ? tensor->tensor.Sum() : 0.0;
}

lodem_status lodem_counts_load(const lodem_network* network, const char* path,
                               lodem_counts** out) {
  return Guard([&] {
    Need(network, "network");
    Need(path, "path");
    Need(out, "out");
    return Emit(out, lodem::LoadCounts(network->net, path));
  });
}

void lodem_counts_free(lodem_counts* counts) { delete counts; }

void lodem_weights_default(lodem_weights* weights) {
  if (!weights) return;
  const lodem::Weights w;
  *weights = {w.tc, w.p, w.c, w.k, w.tv};
}

lodem_status lodem_penetration_rate(const lodem_tensor* b,
                                    const lodem_counts* counts, double* eta) {
  return Guard([&] {
    Need(b, "b");
    Need(counts, "counts");
    Need(eta, "eta");
    *eta = lodem::PenetrationRate(b->tensor, counts->obs);
    return LODEM_OK;
  });
}

lodem_status lodem_naive_solution(const lodem_tensor* b, double eta,
                                  lodem_tensor** out) {
  return Guard([&] {
    Need(b, "b");
    Need(out, "out");
    return Emit(out, lodem::NaiveSolution(b->tensor, eta));
  });
}

lodem_status lodem_rmse(const lodem_tensor* estimate, const lodem_tensor* truth,
                        double* out) {
  return Guard([&] {
    Need(estimate, "estimate");
    Need(truth, "truth");
    Need(out, "out");
    *out = lodem::Rmse(estimate->tensor, truth->tensor);
    return LODEM_OK;
  });
}

lodem_status lodem_totals(const lodem_network* network, const lodem_tensor* q,
                          double* n_or, double* n_dest) {
  return Guard([&] {
    Need(network, "network");
    Need(q, "q");
    const auto t = lodem::VehicleTotals(q->tensor, network->net);
    if (n_or) *n_or = t.by_origin;
    if (n_dest) *n_dest = t.by_destination;
    return LODEM_OK;
  });
}

lodem_status lodem_evaluate_objective(const lodem_network* network,
                                      const lodem_tensor* q,
                                      const lodem_tensor* b,
                                      const lodem_counts* counts,
                                      const lodem_weights* weights, double eta,
                                      lodem_objective* out) {
  return Guard([&] {
    Need(network, "network");
    Need(q, "q");
    Need(b, "b");
    Need(counts, "counts");
    Need(weights, "weights");
    Need(out, "out");
    const auto& net = network->net;
    const auto similarity = lodem::BuildSimilarityOperator(
        net.graph, net.scanner_nodes, net.terminal_only);
    const auto r = lodem::EvalObjective(q->tensor, b->tensor, counts->obs, net,
                                        similarity, eta, ToWeights(*weights));
    *out = {r.f_tc, r.f_p,  r.f_k, r.f_tv,          r.f_c_violations,
            r.n_or, r.n_dest, r.eta, r.total_weighted};
    return LODEM_OK;
  });
}

void lodem_solve_options_default(lodem_solve_options* options) {
  if (!options) return;
  const lodem::SolverConfig c;
  lodem_weights_default(&options->weights);
  options->max_iterations = c.max_iterations;
  options->rms_tolerance = c.rms_tolerance;
  options->check_interval = c.check_interval;
  options->k_paths = c.support.k_paths;
  options->full_support = c.support.full ? 1 : 0;
  options->seed = c.seed;
}

lodem_status lodem_estimate(const lodem_network* network, const lodem_tensor* b,
                            const lodem_counts* counts,
                            const lodem_solve_options* options,
                            lodem_tensor** out, lodem_solve_info* info) {
  return Guard([&] {
    Need(network, "network");
    Need(b, "b");
    Need(counts, "counts");
    Need(options, "options");
    Need(out, "out");
    lodem::SolverConfig c;
    c.weights = ToWeights(options->weights);
    c.max_iterations = options->max_iterations;
    c.rms_tolerance = options->rms_tolerance;
    c.check_interval = options->check_interval;
    c.support.k_paths = options->k_paths;
    c.support.full = options->full_support != 0;
    c.seed = options->seed;
    const auto& net = network->net;
    const auto similarity = lodem::BuildSimilarityOperator(
        net.graph, net.scanner_nodes, net.terminal_only);
    auto result =
        lodem::EstimateLodm(net, b->tensor, counts->obs, similarity, c);
    if (info) {
      *info = {result.converged ? 1 : 0, result.iterations, result.support_size,
               result.eta, result.tau, result.sigma, result.initial_objective,
               result.final_objective};
    }
    Emit(out, std::move(result.estimate));
    if (!result.converged) {
      last_error = "solver reached the iteration limit before converging";
      return LODEM_NOT_CONVERGED;
    }
    return LODEM_OK;
  });
}

}  // extern "C"
