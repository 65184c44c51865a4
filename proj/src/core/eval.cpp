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

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "csv.hpp"
#include "error.hpp"

namespace lodem {

LodTensor NaiveSolution(const LodTensor& b, double eta) {
  if (!(eta > 0.0)) Fail(ErrorKind::kNumeric, "penetration rate must be positive");
  return b.Scaled(1.0 / eta);
}

double Rmse(const LodTensor& estimate, const LodTensor& truth) {
  if (estimate.scanner_count() != truth.scanner_count() ||
      estimate.link_count() != truth.link_count()) {
    Fail(ErrorKind::kArgument, "tensors live on different index spaces");
  }
  auto a = estimate.entries();
  auto b = truth.entries();
  std::size_t i = 0, j = 0, n = 0;
  double ss = 0.0;
  while (i < a.size() || j < b.size()) {
    double d;
    if (j == b.size() || (i < a.size() && a[i].key < b[j].key)) {
      d = a[i++].value;
    } else if (i == a.size() || b[j].key < a[i].key) {
      d = b[j++].value;
    } else {
      d = a[i++].value - b[j++].value;
    }
    ss += d * d;
    ++n;
  }
  if (n == 0) Fail(ErrorKind::kArgument, "rmse over an empty support");
  return std::sqrt(ss / static_cast<double>(n));
}

std::vector<OdFlow> ExtractLinkOd(const LodTensor& q, std::size_t link,
                                  std::size_t top_n) {
  if (link >= q.link_count()) Fail(ErrorKind::kArgument, "unknown link");
  std::vector<OdFlow> out;
  for (const auto& e : q.LinkSlice(link)) {
    out.push_back({e.key.origin, e.key.destination, e.value});
  }
  std::sort(out.begin(), out.end(), [](const OdFlow& x, const OdFlow& y) {
    return std::tie(y.value, x.origin, x.destination) <
           std::tie(x.value, y.origin, y.destination);
  });
  if (top_n > 0 && out.size() > top_n) out.resize(top_n);
  return out;
}

std::vector<LinkFlow> ExtractOdLinks(const LodTensor& q, std::size_t origin,
                                     std::size_t destination) {
  if (origin >= q.scanner_count() || destination >= q.scanner_count()) {
    Fail(ErrorKind::kArgument, "unknown scanner");
  }
  std::vector<LinkFlow> out;
  for (const auto& e : q.OdSlice(origin, destination)) {
    out.push_back({e.key.link, e.value});
  }
  return out;
}

ComparisonRow MakeRow(std::string label, const ObjectiveReport& report,
                      std::optional<Weights> weights,
                      std::optional<double> rmse) {
  ComparisonRow row;
  row.label = std::move(label);
  row.weights = weights;
  row.f_tc = report.f_tc;
  row.f_k = report.f_k;
  row.f_p = report.f_p;
  row.f_tv = report.f_tv;
  row.n_or = report.n_or;
  row.n_dest = report.n_dest;
  row.rmse = rmse;
  return row;
}

void WriteComparison(const std::vector<ComparisonRow>& rows,
                     const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << "label,gamma_tc,gamma_p,gamma_c,gamma_k,gamma_tv,f_tc,f_k,f_p,f_tv,"
         "n_or,n_dest,rmse\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? csv::FormatDouble(*v) : std::string();
  };
  for (const auto& r : rows) {
    std::vector<std::string> f{r.label};
    if (r.weights) {
      for (double g : {r.weights->tc, r.weights->p, r.weights->c, r.weights->k,
                       r.weights->tv})
        f.push_back(csv::FormatDouble(g));
    } else {
      f.insert(f.end(), 5, std::string());
    }
    for (double v : {r.f_tc, r.f_k, r.f_p, r.f_tv, r.n_or, r.n_dest})
      f.push_back(csv::FormatDouble(v));
    f.push_back(opt(r.rmse));
    out << csv::Join(f, ',') << '\n';
  }
}

}  // namespace lodem
