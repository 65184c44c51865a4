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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace lodem {

void Weights::Validate() const {
  for (double g : {tc, p, c, k, tv}) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      Fail(ErrorKind::kConfig, "weights must be finite and nonnegative");
    }
  }
  if (c > 1.0) Fail(ErrorKind::kConfig, "gamma_c must lie in [0, 1]");
}

bool Weights::AllZero() const {
  return tc == 0 && p == 0 && c == 0 && k == 0 && tv == 0;
}

double PenetrationRate(const LodTensor& b, const CountObservations& obs) {
  double counted = 0.0;
  for (std::size_t l = 0; l < obs.mask.size(); ++l) {
    if (obs.mask[l]) counted += obs.counts[l];
  }
  if (!(counted > 0.0)) Fail(ErrorKind::kNumeric, "no counted traffic");
  double sampled = 0.0;
  for (const auto& e : b.entries()) {
    if (obs.mask[e.key.link]) sampled += e.value;
  }
  return sampled / counted;
}

std::vector<double> LinkVolumes(const LodTensor& q) {
  std::vector<double> v(q.link_count(), 0.0);
  for (const auto& e : q.entries()) v[e.key.link] += e.value;
  return v;
}

std::vector<double> OdMatrix(const LodTensor& q, const Network& net,
                             OdSide side) {
  const std::size_t ns = net.scanner_count();
  std::vector<double> t(ns * ns, 0.0);
  for (const auto& e : q.entries()) {
    const Link& link = net.graph.link(e.key.link);
    if (side == OdSide::kOrigin) {
      if (link.tail == net.scanner_nodes[e.key.origin]) {
        t[e.key.origin * ns + e.key.destination] += e.value;
      }
    } else if (link.head == net.scanner_nodes[e.key.destination]) {
      t[e.key.origin * ns + e.key.destination] += e.value;
    }
  }
  return t;
}

Totals VehicleTotals(const LodTensor& q, const Network& net) {
  Totals t;
  for (double v : OdMatrix(q, net, OdSide::kOrigin)) t.by_origin += v;
  for (double v : OdMatrix(q, net, OdSide::kDestination)) t.by_destination += v;
  return t;
}

double PoissonTerm(double b, double eta, double q) {
  const double inf = std::numeric_limits<double>::infinity();
  const double rate = eta * q;
  if (q < 0.0) return inf;
  if (b > 0.0) return rate > 0.0 ? rate - b * std::log(rate) : inf;
  return rate;
}

std::string ReportToJson(const ObjectiveReport& r) {
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["f_tc"] = num(r.f_tc);
  j["f_p"] = num(r.f_p);
  j["f_k"] = num(r.f_k);
  j["f_tv"] = num(r.f_tv);
  j["f_c_violations"] = r.f_c_violations;
  j["n_or"] = num(r.n_or);
  j["n_dest"] = num(r.n_dest);
  j["eta"] = num(r.eta);
  j["total_weighted"] = num(r.total_weighted);
  return j.dump(2) + "\n";
}

void WriteReport(const ObjectiveReport& report,
                 const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << ReportToJson(report);
}

std::vector<TensorKey> BuildSupport(const Network& net, const LodTensor& b,
                                    const SupportOptions& options) {
  std::vector<TensorKey> keys;
  for (const auto& e : b.entries()) keys.push_back(e.key);
  const std::size_t ns = net.scanner_count();
  const std::size_t nl = net.link_count();
  if (options.full) {
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < ns; ++j) {
        if (i == j) continue;
        for (std::size_t l = 0; l < nl; ++l) keys.push_back({i, j, l});
      }
  } else if (options.k_paths > 0) {
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = 0; j < ns; ++j) {
        if (i == j) continue;
        const std::size_t from = net.scanner_nodes[i];
        const std::size_t to = net.scanner_nodes[j];
        auto paths = KShortestPaths(net.graph, from, to, options.k_paths,
                                    net.terminal_only);
        if (paths.empty()) continue;
        for (const auto& p : paths)
          for (std::size_t l : p) keys.push_back({i, j, l});
        // Every way out of the origin scanner and into the destination one.
        if (net.terminal_only[from]) {
          for (std::size_t l : net.graph.OutLinks(from))
            if (net.graph.link(l).is_virtual) keys.push_back({i, j, l});
        }
        if (net.terminal_only[to]) {
          for (std::size_t l : net.graph.InLinks(to))
            if (net.graph.link(l).is_virtual) keys.push_back({i, j, l});
        }
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

SupportOperators::SupportOperators(std::vector<TensorKey> keys,
                                   const Network& net,
                                   const SimilarityOperator& similarity,
                                   const CountObservations& obs)
    : keys_(std::move(keys)),
      link_mask_(obs.mask),
      link_counts_(obs.counts),
      link_count_(net.link_count()),
      scanner_count_(net.scanner_count()) {
  if (!std::is_sorted(keys_.begin(), keys_.end()) ||
      std::adjacent_find(keys_.begin(), keys_.end()) != keys_.end()) {
    Fail(ErrorKind::kArgument, "support keys must be sorted and unique");
  }
  if (link_mask_.size() != link_count_) {
    Fail(ErrorKind::kArgument, "count observations do not match the network");
  }
  const std::size_t n = keys_.size();
  head_slot_.assign(n, kNone);
  tail_slot_.assign(n, kNone);

  // Conservation slots: per OD, the nodes touched by its entries other than
  // its own endpoints and attached scanner nodes.
  std::size_t e = 0;
  while (e < n) {
    std::size_t end = e;
    while (end < n && keys_[end].origin == keys_[e].origin &&
           keys_[end].destination == keys_[e].destination) {
      ++end;
    }
    const std::size_t from = net.scanner_nodes[keys_[e].origin];
    const std::size_t to = net.scanner_nodes[keys_[e].destination];
    std::map<std::size_t, std::size_t> local;
    const std::size_t slot_begin = slot_count_;
    auto slot_of = [&](std::size_t node) -> std::size_t {
      if (node == from || node == to || net.terminal_only[node]) return kNone;
      auto [it, inserted] = local.emplace(node, slot_count_);
      if (inserted) ++slot_count_;
      return it->second;
    };
    for (std::size_t x = e; x < end; ++x) {
      const Link& link = net.graph.link(keys_[x].link);
      head_slot_[x] = slot_of(link.head);
      tail_slot_[x] = slot_of(link.tail);
    }
    ods_.push_back({e, end, slot_begin, slot_count_});
    e = end;
  }

  // Total-variation pairs.
  std::vector<std::vector<const SimilarityRow*>> by_first(scanner_count_),
      by_second(scanner_count_);
  for (const auto& row : similarity.rows) {
    if (row.first >= scanner_count_ || row.second >= scanner_count_) {
      Fail(ErrorKind::kArgument, "similarity row references unknown scanner");
    }
    by_first[row.first].push_back(&row);
    by_second[row.second].push_back(&row);
  }
  for (std::size_t x = 0; x < n; ++x) {
    const auto [o, d, l] = keys_[x];
    // Similar origins, shared destination d outside the pair.
    for (const SimilarityRow* r : by_first[o]) {
      if (d == o || d == r->second) continue;
      tv_pairs_.push_back({x, Find({r->second, d, l}), r->weight});
    }
    for (const SimilarityRow* r : by_second[o]) {
      if (d == o || d == r->first) continue;
      if (Find({r->first, d, l}) == kNone)
        tv_pairs_.push_back({kNone, x, r->weight});
    }
    // Similar destinations, shared origin o outside the pair.
    for (const SimilarityRow* r : by_first[d]) {
      if (o == d || o == r->second) continue;
      tv_pairs_.push_back({x, Find({o, r->second, l}), r->weight});
    }
    for (const SimilarityRow* r : by_second[d]) {
      if (o == d || o == r->first) continue;
      if (Find({o, r->first, l}) == kNone)
        tv_pairs_.push_back({kNone, x, r->weight});
    }
  }
}

std::size_t SupportOperators::Find(const TensorKey& key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return kNone;
  return static_cast<std::size_t>(it - keys_.begin());
}

std::vector<double> SupportOperators::Gather(const LodTensor& t) const {
  std::vector<double> v(keys_.size(), 0.0);
  auto entries = t.entries();
  // Both sequences are sorted; merge.
  std::size_t x = 0;
  for (const auto& e : entries) {
    while (x < keys_.size() && keys_[x] < e.key) ++x;
    if (x < keys_.size() && keys_[x] == e.key) v[x] = e.value;
  }
  return v;
}

LodTensor SupportOperators::Scatter(std::span<const double> values) const {
  std::vector<TensorEntry> entries;
  entries.reserve(keys_.size());
  for (std::size_t x = 0; x < keys_.size(); ++x) {
    entries.push_back({keys_[x], std::max(0.0, values[x])});
  }
  return LodTensor::FromEntries(scanner_count_, link_count_,
                                std::move(entries));
}

double SupportOperators::CountTerm(std::span<const double> q) const {
  std::vector<double> vol(link_count_, 0.0);
  for (std::size_t x = 0; x < keys_.size(); ++x) vol[keys_[x].link] += q[x];
  double f = 0.0;
  for (std::size_t l = 0; l < link_count_; ++l) {
    if (!link_mask_[l]) continue;
    const double r = link_counts_[l] - vol[l];
    f += r * r;
  }
  return f;
}

void SupportOperators::Residuals(std::span<const double> q,
                                 std::vector<double>& r) const {
  r.assign(slot_count_, 0.0);
  for (std::size_t x = 0; x < keys_.size(); ++x) {
    if (head_slot_[x] != kNone) r[head_slot_[x]] += q[x];
    if (tail_slot_[x] != kNone) r[tail_slot_[x]] -= q[x];
  }
}

double SupportOperators::KirchhoffTerm(std::span<const double> q) const {
  std::vector<double> r;
  Residuals(q, r);
  double f = 0.0;
  for (double v : r) f += v * v;
  return f;
}

double SupportOperators::TvTerm(std::span<const double> q) const {
  double f = 0.0;
  for (const auto& p : tv_pairs_) {
    const double a = p.minus == kNone ? 0.0 : q[p.minus];
    const double b = p.plus == kNone ? 0.0 : q[p.plus];
    f += p.weight * std::abs(b - a);
  }
  return f;
}

double SupportOperators::PoissonSum(std::span<const double> q,
                                    std::span<const double> b,
                                    double eta) const {
  double f = 0.0;
  for (std::size_t x = 0; x < keys_.size(); ++x) {
    f += PoissonTerm(b[x], eta, q[x]);
  }
  return f;
}

void SupportOperators::SmoothGradient(std::span<const double> q,
                                      const Weights& w,
                                      std::span<double> out) const {
  std::vector<double> vol(link_count_, 0.0);
  for (std::size_t x = 0; x < keys_.size(); ++x) vol[keys_[x].link] += q[x];
  std::vector<double> r;
  Residuals(q, r);
  for (std::size_t x = 0; x < keys_.size(); ++x) {
    const std::size_t l = keys_[x].link;
    double g = 0.0;
    if (link_mask_[l]) g -= 2.0 * w.tc * (link_counts_[l] - vol[l]);
    double dk = 0.0;
    if (head_slot_[x] != kNone) dk += r[head_slot_[x]];
    if (tail_slot_[x] != kNone) dk -= r[tail_slot_[x]];
    out[x] = g + 2.0 * w.k * dk;
  }
}

void SupportOperators::SmoothHessian(std::span<const double> v,
                                     const Weights& w,
                                     std::span<double> out) const {
  std::vector<double> vol(link_count_, 0.0);
  for (std::size_t x = 0; x < keys_.size(); ++x) vol[keys_[x].link] += v[x];
  std::vector<double> r;
  Residuals(v, r);
  for (std::size_t x = 0; x < keys_.size(); ++x) {
    const std::size_t l = keys_[x].link;
    double h = link_mask_[l] ? 2.0 * w.tc * vol[l] : 0.0;
    double dk = 0.0;
    if (head_slot_[x] != kNone) dk += r[head_slot_[x]];
    if (tail_slot_[x] != kNone) dk -= r[tail_slot_[x]];
    out[x] = h + 2.0 * w.k * dk;
  }
}

void SupportOperators::ApplyTv(std::span<const double> q,
                               std::span<double> y) const {
  for (std::size_t p = 0; p < tv_pairs_.size(); ++p) {
    const auto& pr = tv_pairs_[p];
    const double a = pr.minus == kNone ? 0.0 : q[pr.minus];
    const double b = pr.plus == kNone ? 0.0 : q[pr.plus];
    y[p] = pr.weight * (b - a);
  }
}

void SupportOperators::ApplyTvAdjoint(std::span<const double> y,
                                      std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t p = 0; p < tv_pairs_.size(); ++p) {
    const auto& pr = tv_pairs_[p];
    if (pr.minus != kNone) out[pr.minus] -= pr.weight * y[p];
    if (pr.plus != kNone) out[pr.plus] += pr.weight * y[p];
  }
}

ObjectiveReport EvalObjective(const LodTensor& q, const LodTensor& b,
                              const CountObservations& obs, const Network& net,
                              const SimilarityOperator& similarity, double eta,
                              const Weights& w) {
  std::vector<TensorKey> keys;
  for (const auto& e : q.entries()) keys.push_back(e.key);
  for (const auto& e : b.entries()) keys.push_back(e.key);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (b.nnz() > 0 && !(eta > 0.0)) {
    Fail(ErrorKind::kArgument, "eta must be positive when B is nonempty");
  }
  SupportOperators ops(std::move(keys), net, similarity, obs);
  const auto qv = ops.Gather(q);
  const auto bv = ops.Gather(b);

  ObjectiveReport r;
  r.eta = eta;
  r.f_tc = ops.CountTerm(qv);
  r.f_p = ops.PoissonSum(qv, bv, eta);
  r.f_k = ops.KirchhoffTerm(qv);
  r.f_tv = ops.TvTerm(qv);
  for (std::size_t x = 0; x < qv.size(); ++x) r.f_c_violations += qv[x] < bv[x];
  const Totals t = VehicleTotals(q, net);
  r.n_or = t.by_origin;
  r.n_dest = t.by_destination;

  auto weighted = [](double g, double f) { return g == 0.0 ? 0.0 : g * f; };
  r.total_weighted = weighted(w.tc, r.f_tc) + weighted(w.p, r.f_p) +
                     weighted(w.k, r.f_k) + weighted(w.tv, r.f_tv);
  if (w.c > 0.0 && r.f_c_violations > 0) {
    r.total_weighted = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace lodem
