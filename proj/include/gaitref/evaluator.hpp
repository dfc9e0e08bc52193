#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gaitref/io.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

struct Embedded {
  Tensor parts;  // P×d
  std::string subject;
  std::string view;
};

using ExcludePredicate = std::function<bool(const Embedded& probe, const Embedded& gallery_item)>;

// Mean over parts of the Euclidean distance between corresponding part rows.
inline double embedding_distance(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || !a.same_shape(b)) {
    throw DimensionError("embeddings must share a P×d shape, got " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
  const std::int64_t p = a.dim(0), d = a.dim(1);
  double total = 0.0;
  for (std::int64_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const double diff = a.at(i, j) - b.at(i, j);
      s += diff * diff;
    }
    total += std::sqrt(s);
  }
  return total / static_cast<double>(p);
}

struct ProbeTrace {
  std::int64_t probe_index = -1;
  std::string subject;
  std::vector<std::int64_t> ranking;  // gallery indices, best first, post-exclusion
  double average_precision = 0.0;
  double inverse_negative_penalty = 0.0;
  std::int64_t first_hit_rank = 0;  // 1-indexed rank of the best positive
};

struct RetrievalReport {
  std::map<int, double> rank_k;
  double mAP = 0.0;
  double mINP = 0.0;
  std::vector<ProbeTrace> traces;
};

// Ranked retrieval over probe/gallery embeddings. The exclusion predicate
// removes gallery candidates before ranking; ties in distance keep gallery
// insertion order. Every probe must retain at least one candidate and at
// least one candidate with a matching subject.
inline RetrievalReport evaluate_retrieval(const std::vector<Embedded>& probes,
                                          const std::vector<Embedded>& gallery,
                                          const ExcludePredicate& exclude = nullptr,
                                          const std::vector<int>& ks = {1, 5, 10, 20}) {
  if (probes.empty()) throw ContractError("probe set is empty");
  if (gallery.empty()) throw ContractError("gallery set is empty");
  for (const Embedded& e : gallery) {
    if (!e.parts.same_shape(probes[0].parts)) {
      throw DimensionError("embedding shapes are not homogeneous");
    }
  }

  RetrievalReport report;
  std::map<int, std::int64_t> hits;
  for (int k : ks) hits[k] = 0;

  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const Embedded& probe = probes[pi];
    std::vector<std::int64_t> candidates;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (exclude && exclude(probe, gallery[g])) continue;
      candidates.push_back(static_cast<std::int64_t>(g));
    }
    if (candidates.empty()) {
      throw ProtocolError("probe " + std::to_string(pi) + " (subject " + probe.subject +
                          ") has no gallery candidates");
    }
    std::vector<double> dist(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      dist[i] = embedding_distance(probe.parts, gallery[static_cast<std::size_t>(candidates[i])].parts);
    }
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    ProbeTrace trace;
    trace.probe_index = static_cast<std::int64_t>(pi);
    trace.subject = probe.subject;
    trace.ranking.reserve(order.size());
    std::int64_t positives = 0, seen_pos = 0;
    double ap_sum = 0.0;
    std::int64_t hardest_rank = 0, first_hit = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::int64_t g = candidates[order[r]];
      trace.ranking.push_back(g);
      if (gallery[static_cast<std::size_t>(g)].subject == probe.subject) {
        ++positives;
        ++seen_pos;
        const std::int64_t rank1 = static_cast<std::int64_t>(r) + 1;
        ap_sum += static_cast<double>(seen_pos) / static_cast<double>(rank1);
        hardest_rank = rank1;
        if (first_hit == 0) first_hit = rank1;
      }
    }
    if (positives == 0) {
      throw ProtocolError("probe " + std::to_string(pi) + " (subject " + probe.subject +
                          ") has no positive gallery candidate");
    }
    trace.average_precision = ap_sum / static_cast<double>(positives);
    trace.inverse_negative_penalty =
        static_cast<double>(positives) / static_cast<double>(hardest_rank);
    trace.first_hit_rank = first_hit;
    report.mAP += trace.average_precision;
    report.mINP += trace.inverse_negative_penalty;
    for (int k : ks) {
      if (first_hit <= k) ++hits[k];
    }
    report.traces.push_back(std::move(trace));
  }

  const double n = static_cast<double>(probes.size());
  report.mAP /= n;
  report.mINP /= n;
  for (int k : ks) report.rank_k[k] = static_cast<double>(hits[k]) / n;
  return report;
}

inline double rank_k_accuracy(const std::vector<Embedded>& probes,
                              const std::vector<Embedded>& gallery, int k,
                              const ExcludePredicate& exclude = nullptr) {
  return evaluate_retrieval(probes, gallery, exclude, {k}).rank_k.at(k);
}

inline double mean_average_precision(const std::vector<Embedded>& probes,
                                     const std::vector<Embedded>& gallery,
                                     const ExcludePredicate& exclude = nullptr) {
  return evaluate_retrieval(probes, gallery, exclude).mAP;
}

inline double mean_inverse_negative_penalty(const std::vector<Embedded>& probes,
                                            const std::vector<Embedded>& gallery,
                                            const ExcludePredicate& exclude = nullptr) {
  return evaluate_retrieval(probes, gallery, exclude).mINP;
}

inline std::string report_csv(const RetrievalReport& report) {
  std::string out = "metric,value\n";
  for (const auto& [k, v] : report.rank_k) {
    out += "rank_" + std::to_string(k) + ',' + detail::format_double(v) + '\n';
  }
  out += "mAP," + detail::format_double(report.mAP) + '\n';
  out += "mINP," + detail::format_double(report.mINP) + '\n';
  return out;
}

inline std::string report_table(const RetrievalReport& report) {
  char buf[128];
  std::string out;
  for (const auto& [k, v] : report.rank_k) {
    std::snprintf(buf, sizeof(buf), "rank-%-3d %8.4f\n", k, v);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "mAP      %8.4f\nmINP     %8.4f\n", report.mAP, report.mINP);
  out += buf;
  return out;
}

inline std::string trace_csv(const RetrievalReport& report) {
  std::string out = "probe,subject,first_hit_rank,AP,INP\n";
  for (const ProbeTrace& t : report.traces) {
    out += std::to_string(t.probe_index) + ',' + t.subject + ',' +
           std::to_string(t.first_hit_rank) + ',' + detail::format_double(t.average_precision) +
           ',' + detail::format_double(t.inverse_negative_penalty) + '\n';
  }
  return out;
}

}  // namespace gaitref
