#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gsp/error.hpp"

namespace gsp {

// ID is the positive class and a higher score means "more ID" everywhere below.

namespace detail {

inline void check_binary_input(std::span<const double> scores, const std::vector<bool>& is_id) {
  if (scores.size() != is_id.size()) {
    throw InvalidArgument("scores (" + std::to_string(scores.size()) + ") and flags (" +
                          std::to_string(is_id.size()) + ") differ in length");
  }
  const auto n_id = static_cast<std::size_t>(std::count(is_id.begin(), is_id.end(), true));
  if (n_id == 0 || n_id == is_id.size()) {
    throw InvalidArgument("metrics need at least one ID and one OOD sample");
  }
}

}  // namespace detail

/// Mann-Whitney AUROC: P(score_id > score_ood) + 0.5 P(equal).
inline double auroc(std::span<const double> scores, const std::vector<bool>& is_id) {
  detail::check_binary_input(scores, is_id);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // twice the winning-pair count, kept integral so ties stay exact
  std::uint64_t wins2 = 0;
  std::uint64_t ood_below = 0;
  std::uint64_t n_id = 0;
  std::uint64_t n_ood = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t id_here = 0;
    std::uint64_t ood_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (is_id[order[j]] ? id_here : ood_here) += 1;
      ++j;
    }
    wins2 += 2 * id_here * ood_below + id_here * ood_here;
    ood_below += ood_here;
    n_id += id_here;
    n_ood += ood_here;
    i = j;
  }
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(n_id) * static_cast<double>(n_ood));
}

/**
 * False positive rate at the largest threshold t whose true positive rate
 * (fraction of ID scores >= t) reaches `tpr_target`. No interpolation.
 */
inline double fpr_at_tpr(std::span<const double> scores, const std::vector<bool>& is_id, double tpr_target = 0.95) {
  detail::check_binary_input(scores, is_id);
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw InvalidArgument("tpr target must be in (0, 1]");
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
  for (std::size_t i = 0; i < scores.size(); ++i) (is_id[i] ? id_scores : ood_scores).push_back(scores[i]);
  std::sort(id_scores.begin(), id_scores.end(), std::greater<>());
  std::sort(ood_scores.begin(), ood_scores.end(), std::greater<>());

  const auto n_id = static_cast<double>(id_scores.size());
  // walk ID scores from the top; the first one reaching the target TPR
  // (counting all ties) is the largest admissible threshold
  double threshold = id_scores.back();
  for (std::size_t i = 0; i < id_scores.size();) {
    std::size_t j = i;
    while (j < id_scores.size() && id_scores[j] == id_scores[i]) ++j;
    if (static_cast<double>(j) / n_id >= tpr_target) {
      threshold = id_scores[i];
      break;
    }
    i = j;
  }
  const auto above = static_cast<std::size_t>(
      std::count_if(ood_scores.begin(), ood_scores.end(), [&](double s) { return s >= threshold; }));
  return static_cast<double>(above) / static_cast<double>(ood_scores.size());
}

struct EvalReport {
  std::string method;
  double auroc = 0.0;
  double fpr95 = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::string config;  // serialized configuration echo (JSON text)
};

inline EvalReport evaluate(std::span<const double> scores, const std::vector<bool>& is_id, std::string method,
                           std::string config = "{}") {
  EvalReport r;
  r.method = std::move(method);
  r.auroc = auroc(scores, is_id);
  r.fpr95 = fpr_at_tpr(scores, is_id, 0.95);
  r.n_id = static_cast<std::size_t>(std::count(is_id.begin(), is_id.end(), true));
  r.n_ood = is_id.size() - r.n_id;
  r.config = std::move(config);
  return r;
}

}  // namespace gsp
