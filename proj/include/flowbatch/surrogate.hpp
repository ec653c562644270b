#pragma once
// Evaluation archive and the cheap objective approximation fitted to it.
//
// The archive stores every (genome, true objective) pair seen so far,
// deduplicated by genome. The model is a radial-basis-function interpolant
// over normalized Hamming distance: k(x, y) = exp(-d(x,y)/h) with
// d = hamming/L and bandwidth h = median pairwise training distance. For
// binary vectors the Hamming count IS the squared Euclidean distance, so
// this kernel is exactly the Gaussian kernel on the underlying vector
// space — strictly positive definite for distinct genomes, which keeps the
// Cholesky solve well-posed. Fitting is mean-centered (weights are solved
// on residuals y - mean, predictions add the mean back), so a constant
// archive yields a constant predictor and far-away queries revert to the
// archive mean instead of to zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowbatch/encoding.hpp"

namespace flowbatch {

// Bits packed into 64-bit words so distance is a popcount loop.
struct PackedGenome {
  std::vector<std::uint64_t> words;
  std::size_t n_bits = 0;
};

inline PackedGenome pack_genome(const InstructionVector& g) {
  PackedGenome p;
  p.n_bits = g.bits.size();
  p.words.assign((p.n_bits + 63) / 64, 0);
  for (std::size_t i = 0; i < p.n_bits; ++i)
    if (g.bits[i]) p.words[i / 64] |= (std::uint64_t{1} << (i % 64));
  return p;
}

inline int hamming_distance(const PackedGenome& a, const PackedGenome& b) {
  if (a.n_bits != b.n_bits)
    throw std::invalid_argument("hamming_distance: genome lengths differ");
  int d = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w)
    d += __builtin_popcountll(a.words[w] ^ b.words[w]);
  return d;
}

inline double normalized_distance(const PackedGenome& a,
                                  const PackedGenome& b) {
  return static_cast<double>(hamming_distance(a, b)) /
         static_cast<double>(a.n_bits);
}

// --- archive -----------------------------------------------------------------

class EvalArchive {
 public:
  struct Entry {
    InstructionVector genome;
    double objective = 0.0;
    PackedGenome packed;
  };

  // Returns true if the genome was new. Re-inserting an existing genome is a
  // no-op (idempotent), regardless of the objective passed.
  bool insert(const InstructionVector& genome, double objective) {
    std::string key = genome.bit_line();
    auto [it, fresh] = index_.emplace(std::move(key), entries_.size());
    if (!fresh) return false;
    entries_.push_back({genome, objective, pack_genome(genome)});
    return true;
  }

  bool contains(const InstructionVector& genome) const {
    return index_.count(genome.bit_line()) > 0;
  }

  std::size_t size() const { return entries_.size(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

  // CSV: one row per entry, genome as its canonical bit line.
  void write_csv(std::ostream& os) const {
    os << "genome,objective\n";
    char buf[32];
    for (const auto& e : entries_) {
      std::snprintf(buf, sizeof buf, "%.2f", e.objective);
      os << e.genome.bit_line() << ',' << buf << '\n';
    }
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// --- model -------------------------------------------------------------------

namespace detail {

// In-place Cholesky solve of (A + jitter ladder) w = b for symmetric
// positive-definite A (row-major, n x n). Retries with growing diagonal
// jitter if a pivot degenerates; sizes here are a few hundred at most.
inline std::vector<double> solve_spd(std::vector<double> a, std::size_t n,
                                     std::vector<double> b) {
  const std::vector<double> a0 = a;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (attempt > 0) {
      a = a0;
      jitter = (jitter == 0.0) ? 1e-12 : jitter * 100.0;
      for (std::size_t i = 0; i < n; ++i) a[i * n + i] += jitter;
    }
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      double d = a[j * n + j];
      for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
      if (!(d > 0.0)) {
        ok = false;
        break;
      }
      const double root = std::sqrt(d);
      a[j * n + j] = root;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
        a[i * n + j] = s / root;
      }
    }
    if (!ok) continue;
    // forward substitution: L z = b
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * z[k];
      z[i] = s / a[i * n + i];
    }
    // back substitution: L^T w = z
    std::vector<double> w(n);
    for (std::size_t ii = n; ii-- > 0;) {
      double s = z[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * w[k];
      w[ii] = s / a[ii * n + ii];
    }
    return w;
  }
  throw std::runtime_error("surrogate fit: kernel matrix not positive definite");
}

}  // namespace detail

class SurrogateModel {
 public:
  static constexpr double kRidge = 1e-8;

  // Fits on the full archive (>= 2 distinct entries). Deterministic.
  static SurrogateModel fit(const EvalArchive& archive,
                            double ridge = kRidge) {
    const std::size_t n = archive.size();
    if (n < 2)
      throw std::invalid_argument(
          "surrogate fit: archive needs at least 2 distinct entries");

    SurrogateModel m;
    m.ridge_ = ridge;
    m.points_.reserve(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      m.points_.push_back(archive[i].packed);
      y[i] = archive[i].objective;
    }

    // Bandwidth: median pairwise normalized distance (0.5 when degenerate).
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        dists.push_back(normalized_distance(m.points_[i], m.points_[j]));
    std::sort(dists.begin(), dists.end());
    const std::size_t mcount = dists.size();
    double med = (mcount % 2 == 1)
                     ? dists[mcount / 2]
                     : 0.5 * (dists[mcount / 2 - 1] + dists[mcount / 2]);
    m.bandwidth_ = med > 0.0 ? med : 0.5;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    m.mean_ = mean;

    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      kmat[i * n + i] = 1.0 + ridge;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double k = m.kernel(m.points_[i], m.points_[j]);
        kmat[i * n + j] = k;
        kmat[j * n + i] = k;
      }
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i] - mean;
    m.weights_ = detail::solve_spd(std::move(kmat), n, std::move(rhs));
    m.fitted_ = true;
    return m;
  }

  bool fitted() const { return fitted_; }
  double bandwidth() const { return bandwidth_; }
  double regularization() const { return ridge_; }
  std::size_t training_size() const { return points_.size(); }

  double predict(const PackedGenome& g) const {
    if (!fitted_) throw std::logic_error("surrogate predict: model not fitted");
    double v = mean_;
    for (std::size_t i = 0; i < points_.size(); ++i)
      v += weights_[i] * kernel(points_[i], g);
    return v;
  }

  double predict(const InstructionVector& genome) const {
    return predict(pack_genome(genome));
  }

 private:
  double kernel(const PackedGenome& a, const PackedGenome& b) const {
    return std::exp(-normalized_distance(a, b) / bandwidth_);
  }

  std::vector<PackedGenome> points_;
  std::vector<double> weights_;
  double mean_ = 0.0;
  double bandwidth_ = 0.5;
  double ridge_ = kRidge;
  bool fitted_ = false;
};

}  // namespace flowbatch
