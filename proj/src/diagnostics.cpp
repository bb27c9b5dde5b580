// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dlcm/encoding.hpp"
#include "dlcm/error.hpp"

namespace dlcm {

void PointwiseAccumulator::add(std::span<const double> row) {
  if (draws_ == 0) {
    max_.assign(row.begin(), row.end());
    scaled_sum_.assign(row.size(), 1.0);
    sum_.assign(row.begin(), row.end());
    draws_ = 1;
    return;
  }
  if (row.size() != max_.size()) throw Error(ErrorCode::dimension_mismatch, "subject count changed");
  for (size_t i = 0; i < row.size(); ++i) {
    const double l = row[i];
    if (l > max_[i]) {
      scaled_sum_[i] = scaled_sum_[i] * std::exp(max_[i] - l) + 1.0;
      max_[i] = l;
    } else {
      scaled_sum_[i] += std::exp(l - max_[i]);
    }
    sum_[i] += l;
  }
  ++draws_;
}

void PointwiseAccumulator::merge(const PointwiseAccumulator& o) {
  if (o.draws_ == 0) return;
  if (draws_ == 0) {
    *this = o;
    return;
  }
  if (o.max_.size() != max_.size()) throw Error(ErrorCode::dimension_mismatch, "subject count differs");
  for (size_t i = 0; i < max_.size(); ++i) {
    const double m = std::max(max_[i], o.max_[i]);
    scaled_sum_[i] = scaled_sum_[i] * std::exp(max_[i] - m) + o.scaled_sum_[i] * std::exp(o.max_[i] - m);
    max_[i] = m;
    sum_[i] += o.sum_[i];
  }
  draws_ += o.draws_;
}

double PointwiseAccumulator::lppd() const {
  if (draws_ == 0) throw Error(ErrorCode::empty_matrix, "no draws");
  const double lt = std::log(static_cast<double>(draws_));
  double s = 0;
  for (size_t i = 0; i < max_.size(); ++i) s += max_[i] + std::log(scaled_sum_[i]) - lt;
  return s;
}

double PointwiseAccumulator::waic_penalty() const {
  if (draws_ == 0) throw Error(ErrorCode::empty_matrix, "no draws");
  const double lt = std::log(static_cast<double>(draws_));
  double s = 0;
  for (size_t i = 0; i < max_.size(); ++i)
    s += std::max(0.0, max_[i] + std::log(scaled_sum_[i]) - lt - sum_[i] / draws_);
  return 2.0 * s;
}

namespace {

void check_matrix(const LoglikMatrix& m) {
  if (m.empty() || m.front().empty()) throw Error(ErrorCode::empty_matrix, "log-likelihood matrix is empty");
  for (const auto& r : m)
    if (r.size() != m.front().size()) throw Error(ErrorCode::non_rectangular, "ragged log-likelihood matrix");
}

// per subject: log mean exp and mean
void pointwise_terms(const LoglikMatrix& m, std::vector<double>& lme, std::vector<double>& mean) {
  check_matrix(m);
  const size_t T = m.size(), n = m.front().size();
  lme.assign(n, 0);
  mean.assign(n, 0);
  std::vector<double> col(T);
  for (size_t i = 0; i < n; ++i) {
    double s = 0;
    for (size_t t = 0; t < T; ++t) {
      col[t] = m[t][i];
      s += col[t];
    }
    lme[i] = log_sum_exp(col) - std::log(static_cast<double>(T));
    mean[i] = s / T;
  }
}

}  // namespace

double lppd(const LoglikMatrix& loglik) {
  std::vector<double> lme, mean;
  pointwise_terms(loglik, lme, mean);
  double s = 0;
  for (double v : lme) s += v;
  return s;
}

double waic_penalty(const LoglikMatrix& loglik) {
  std::vector<double> lme, mean;
  pointwise_terms(loglik, lme, mean);
  double s = 0;
  for (size_t i = 0; i < lme.size(); ++i) s += std::max(0.0, lme[i] - mean[i]);
  return 2.0 * s;
}

double waic(const LoglikMatrix& loglik) { return -2.0 * lppd(loglik) + 2.0 * waic_penalty(loglik); }

double gelman_rubin(const std::vector<Eigen::MatrixXd>& series) {
  const int m = static_cast<int>(series.size());
  if (m < 2) throw Error(ErrorCode::too_few_chains, "need at least two chains");
  const long n = series.front().rows();
  const long p = series.front().cols();
  for (const auto& s : series)
    if (s.rows() != n || s.cols() != p) throw Error(ErrorCode::dimension_mismatch, "chains differ in shape");
  if (n < 10) throw Error(ErrorCode::config_invalid, "need at least 10 draws per chain");

  Eigen::MatrixXd means(m, p);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < m; ++k) {
    means.row(k) = series[k].colwise().mean();
    Eigen::MatrixXd centered = series[k].rowwise() - means.row(k);
    W += centered.transpose() * centered;
  }
  W /= static_cast<double>(m) * (n - 1);
  Eigen::RowVectorXd grand = means.colwise().mean();
  Eigen::MatrixXd mc = means.rowwise() - grand;
  Eigen::MatrixXd Bn = mc.transpose() * mc / (m - 1.0);

  // drop coordinates that never move anywhere
  std::vector<int> keep;
  const double scale = std::max({W.diagonal().cwiseAbs().maxCoeff(), Bn.diagonal().cwiseAbs().maxCoeff(), 1e-300});
  for (long j = 0; j < p; ++j)
    if (W(j, j) > 1e-14 * scale || Bn(j, j) > 1e-14 * scale) keep.push_back(static_cast<int>(j));
  const double base = (n - 1.0) / n;
  if (keep.empty()) return base;
  const long q = static_cast<long>(keep.size());
  Eigen::MatrixXd Wk(q, q), Bk(q, q);
  for (long a = 0; a < q; ++a)
    for (long b = 0; b < q; ++b) {
      Wk(a, b) = W(keep[a], keep[b]);
      Bk(a, b) = Bn(keep[a], keep[b]);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(Wk);
  const auto& lam = ew.eigenvalues();
  const double tol = std::max(lam.cwiseAbs().maxCoeff(), 1e-300) * 1e-10;
  std::vector<int> range, null;
  for (long a = 0; a < q; ++a) (lam(a) > tol ? range : null).push_back(static_cast<int>(a));
  const Eigen::MatrixXd& U = ew.eigenvectors();
  // between-chain spread where the chains never vary means they never mix
  for (int a : null) {
    const double v = U.col(a).dot(Bk * U.col(a));
    if (v > 1e-12 * std::max(Bk.diagonal().maxCoeff(), 1e-300)) return std::numeric_limits<double>::infinity();
  }
  if (range.empty()) return base;
  Eigen::MatrixXd S(q, range.size());
  for (size_t k = 0; k < range.size(); ++k) S.col(k) = U.col(range[k]) / std::sqrt(lam(range[k]));
  Eigen::MatrixXd M = S.transpose() * Bk * S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M);
  const double lmax = std::max(0.0, em.eigenvalues().maxCoeff());
  return base + (m + 1.0) / m * lmax;
}

namespace {

// Concatenated marginal probabilities for one draw, class-major, last category dropped.
std::vector<std::vector<double>> class_profiles(const ChainRecord& rec, size_t draw) {
  const long t = rec.draw_iterations[draw];
  auto marg = marginal_item_probs(rec.draws[draw], rec.structure_at(t), rec.cardinalities);
  std::vector<std::vector<double>> out(rec.C);
  for (int c = 0; c < rec.C; ++c)
    for (int j = 0; j < rec.J; ++j)
      for (int q = 0; q + 1 < rec.cardinalities[j]; ++q) out[c].push_back(marg[c][j][q]);
  return out;
}

}  // namespace

Eigen::MatrixXd monitored_series(const ChainRecord& rec, const std::vector<int>& perm) {
  std::vector<int> pr = perm;
  if (pr.empty())
    for (int c = 0; c < rec.C; ++c) pr.push_back(c);
  int width = 0;
  for (int j = 0; j < rec.J; ++j) width += rec.cardinalities[j] - 1;
  const long cols = (rec.C - 1) + static_cast<long>(rec.C) * width + 1;
  Eigen::MatrixXd out(static_cast<long>(rec.draws.size()), cols);
  for (size_t k = 0; k < rec.draws.size(); ++k) {
    auto prof = class_profiles(rec, k);
    std::vector<double> pi_aligned(rec.C);
    std::vector<std::vector<double>> prof_aligned(rec.C);
    for (int c = 0; c < rec.C; ++c) {
      pi_aligned[pr[c]] = rec.draws[k].pi[c];
      prof_aligned[pr[c]] = std::move(prof[c]);
    }
    long col = 0;
    for (int c = 0; c + 1 < rec.C; ++c) out(k, col++) = pi_aligned[c];
    for (int c = 0; c < rec.C; ++c)
      for (double v : prof_aligned[c]) out(k, col++) = v;
    out(k, col) = rec.total_loglik[rec.draw_iterations[k] - 1];
  }
  return out;
}

std::vector<std::vector<int>> align_class_labels(const std::vector<ChainRecord>& records) {
  std::vector<std::vector<int>> perms;
  if (records.empty()) return perms;
  auto mean_profile = [](const ChainRecord& rec) {
    std::vector<std::vector<double>> acc(rec.C);
    for (size_t k = 0; k < rec.draws.size(); ++k) {
      auto prof = class_profiles(rec, k);
      for (int c = 0; c < rec.C; ++c) {
        if (acc[c].empty()) acc[c].assign(prof[c].size(), 0.0);
        for (size_t x = 0; x < prof[c].size(); ++x) acc[c][x] += prof[c][x] / rec.draws.size();
      }
    }
    return acc;
  };
  const auto ref = mean_profile(records.front());
  for (const auto& rec : records) {
    const int C = rec.C;
    auto prof = mean_profile(rec);
    std::vector<std::tuple<double, int, int>> pairs;
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b) {
        double d = 0;
        for (size_t x = 0; x < prof[a].size() && x < ref[b].size(); ++x) d += std::abs(prof[a][x] - ref[b][x]);
        pairs.emplace_back(d, a, b);
      }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> perm(C, -1);
    std::vector<char> used(C, 0);
    for (auto& [d, a, b] : pairs)
      if (perm[a] < 0 && !used[b]) {
        perm[a] = b;
        used[b] = 1;
      }
    perms.push_back(perm);
  }
  return perms;
}

double gelman_rubin_records(const std::vector<ChainRecord>& records) {
  if (records.size() < 2) throw Error(ErrorCode::too_few_chains, "need at least two chains");
  auto perms = align_class_labels(records);
  std::vector<Eigen::MatrixXd> series;
  long n = std::numeric_limits<long>::max();
  for (size_t k = 0; k < records.size(); ++k) {
    series.push_back(monitored_series(records[k], perms[k]));
    n = std::min<long>(n, series.back().rows());
  }
  for (auto& s : series) s = s.topRows(n).eval();
  return gelman_rubin(series);
}

std::vector<StructureShare> structure_mode(const std::vector<ChainRecord>& records, long warmup_cut) {
  std::map<std::vector<int>, long> tally;
  long total = 0;
  std::vector<int> key;
  for (const auto& rec : records) {
    const long cut = warmup_cut < 0 ? rec.warmup : warmup_cut;
    for (long t = cut; t < rec.iterations(); ++t) {
      // records hold canonical columns already; relabel anyway for hand-built ones
      key.clear();
      const auto& cols = rec.structures[t];
      for (int c = 0; c < rec.C; ++c) {
        auto col = canonical_column(std::span<const int>(cols.data() + static_cast<long>(c) * rec.J, rec.J));
        key.insert(key.end(), col.begin(), col.end());
      }
      ++tally[key];
      ++total;
    }
  }
  std::vector<StructureShare> out;
  if (records.empty()) return out;
  const ChainRecord& r0 = records.front();
  for (auto& [cols, count] : tally) {
    DomainStructure s(r0.J, r0.C, r0.D, StructureMode::heterogeneous);
    for (int c = 0; c < r0.C; ++c)
      s.set_column(c, std::span<const int>(cols.data() + static_cast<long>(c) * r0.J, r0.J));
    try {
      s.set_mode(r0.mode, r0.equivalence);
    } catch (const Error&) {
    }
    out.push_back({std::move(s), count, static_cast<double>(count) / total});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

std::vector<StructureShare> structure_mode(const ChainRecord& record, long warmup_cut) {
  return structure_mode(std::vector<ChainRecord>{record}, warmup_cut);
}

std::optional<long> first_hit(const ChainRecord& record, const DomainStructure& truth) {
  if (truth.items() != record.J || truth.classes() != record.C)
    throw Error(ErrorCode::dimension_mismatch, "truth has a different shape");
  // compare class columns as a sorted multiset so swapped labels still count
  const int J = record.J;
  std::vector<std::vector<int>> target;
  for (int c = 0; c < truth.classes(); ++c) target.push_back(canonical_column(truth.column(c)));
  std::sort(target.begin(), target.end());
  std::vector<std::vector<int>> cols(record.C);
  for (long t = 0; t < record.iterations(); ++t) {
    const auto& s = record.structures[t];
    for (int c = 0; c < record.C; ++c) cols[c].assign(s.begin() + static_cast<long>(c) * J, s.begin() + static_cast<long>(c + 1) * J);
    std::sort(cols.begin(), cols.end());
    if (cols == target) return t + 1;
  }
  return std::nullopt;
}

FitSummary summarize(const std::vector<ChainRecord>& records) {
  FitSummary s;
  if (records.empty()) throw Error(ErrorCode::empty_matrix, "no chains");
  PointwiseAccumulator acc;
  for (const auto& r : records) acc.merge(r.pointwise);
  s.n_eff_iters = acc.draws();
  if (acc.draws() > 0) {
    s.lppd = acc.lppd();
    s.waic_penalty = acc.waic_penalty();
    s.waic = -2.0 * s.lppd + 2.0 * s.waic_penalty;
  }
  auto modes = structure_mode(records);
  if (!modes.empty()) {
    s.mode_structure = modes.front().structure;
    s.mode_share = modes.front().share;
  }
  if (records.size() >= 2) {
    bool enough = true;
    for (const auto& r : records) enough = enough && r.draws.size() >= 10;
    if (enough) s.psrf = gelman_rubin_records(records);
  }
  return s;
}

DomainStructure ChainRecord::structure_at(long t) const {
  if (t < 1 || t > iterations()) throw Error(ErrorCode::dimension_mismatch, "iteration out of range");
  DomainStructure s(J, C, D, StructureMode::heterogeneous);
  const auto& cols = structures[t - 1];
  for (int c = 0; c < C; ++c) s.set_column(c, std::span<const int>(cols.data() + static_cast<long>(c) * J, J));
  if (mode != StructureMode::heterogeneous) {
    try {
      s.set_mode(mode, equivalence);
    } catch (const Error&) {
    }
  }
  return s;
}

}  // namespace dlcm
