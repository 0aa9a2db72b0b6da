#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trackgraph/appearance.hpp"

namespace trackgraph {

namespace {

constexpr double kJacobiTolerance = 1e-14;
constexpr int kMaxSweeps = 100;
constexpr double kZeroCoordinate = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::size_t first_nonzero(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > kZeroCoordinate) return i;
  }
  return v.size();
}

void fix_sign(std::vector<double>& v) {
  const std::size_t i = first_nonzero(v);
  if (i < v.size() && v[i] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Removes the projection of v onto every basis row (two passes); returns the
// remaining norm.
double orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& u : basis) {
      const double c = dot(v, u);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
    }
  }
  return std::sqrt(dot(v, v));
}

}  // namespace

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) {
    throw Error("jacobi_eigen: matrix size does not match n*n");
  }
  auto at = [&a, n](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  // Column j of v converges to the eigenvector of a(j, j).
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    if (std::sqrt(off) <= kJacobiTolerance * frob) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = at(r, p);
          const double arq = at(r, q);
          at(r, p) = at(p, r) = c * arp - s * arq;
          at(r, q) = at(q, r) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = at(j, j);
    for (std::size_t r = 0; r < n; ++r) out.vectors[j][r] = v[r * n + j];
  }
  return out;
}

std::vector<double> scatter_matrix(const std::vector<std::vector<double>>& centered,
                                   ExecutionPolicy policy) {
  const std::size_t n = centered.size();
  const std::size_t d = n == 0 ? 0 : centered.front().size();
  // Column-major copy so each entry is one contiguous dot product.
  std::vector<double> cols(d * n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < d; ++i) cols[i * n + s] = centered[s][i];

  std::vector<double> out(d * d, 0.0);
  auto row = [&](std::size_t i) {
    std::span<const double> ci(cols.data() + i * n, n);
    for (std::size_t j = i; j < d; ++j) {
      const double v = dot(ci, std::span<const double>(cols.data() + j * n, n));
      out[i * d + j] = v;
      out[j * d + i] = v;
    }
  };
  const auto rows = static_cast<std::ptrdiff_t>(d);
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < rows; ++i) row(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < rows; ++i) row(static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<double> gram_matrix(const std::vector<std::vector<double>>& centered,
                                ExecutionPolicy policy) {
  const std::size_t n = centered.size();
  std::vector<double> out(n * n, 0.0);
  auto row = [&](std::size_t a) {
    for (std::size_t b = a; b < n; ++b) {
      const double v = dot(centered[a], centered[b]);
      out[a * n + b] = v;
      out[b * n + a] = v;
    }
  };
  const auto rows = static_cast<std::ptrdiff_t>(n);
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t a = 0; a < rows; ++a) row(static_cast<std::size_t>(a));
  } else {
    for (std::ptrdiff_t a = 0; a < rows; ++a) row(static_cast<std::size_t>(a));
  }
  return out;
}

std::size_t pca_component_count(std::size_t d, double fraction) {
  if (d == 0) throw Error("pca: zero-dimensional samples");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("pca: fraction must lie in (0, 1]");
  // The small slack keeps exact products such as 0.1 * 250 from rounding up.
  const double raw = std::ceil(fraction * static_cast<double>(d) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, d);
}

PcaBasis pca_fit(const std::vector<std::vector<double>>& samples, double fraction,
                 ExecutionPolicy policy) {
  if (samples.size() < 2) {
    throw Error("pca_fit: need at least 2 samples, got " + std::to_string(samples.size()));
  }
  const std::size_t n = samples.size();
  const std::size_t d = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != d) throw Error("pca_fit: samples have different dimensions");
  }
  const std::size_t k = pca_component_count(d, fraction);

  PcaBasis basis;
  basis.mean.assign(d, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < d; ++i) basis.mean[i] += s[i];
  for (double& m : basis.mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> centered(samples);
  for (auto& s : centered)
    for (std::size_t i = 0; i < d; ++i) s[i] -= basis.mean[i];

  const double norm = 1.0 / static_cast<double>(n - 1);
  struct Pair {
    double variance;
    std::vector<double> vec;
  };
  std::vector<Pair> pairs;

  if (d <= n) {
    auto cov = scatter_matrix(centered, policy);
    for (double& x : cov) x *= norm;
    auto eig = jacobi_eigen(std::move(cov), d);
    for (std::size_t j = 0; j < d; ++j) pairs.push_back({eig.values[j], std::move(eig.vectors[j])});
  } else {
    // Fewer samples than dimensions: decompose the n x n Gram matrix and lift
    // each eigenvector back through the data.
    auto gram = gram_matrix(centered, policy);
    for (double& x : gram) x *= norm;
    auto eig = jacobi_eigen(std::move(gram), n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> u(d, 0.0);
      if (eig.values[j] > 0.0) {
        for (std::size_t s = 0; s < n; ++s) {
          const double w = eig.vectors[j][s];
          for (std::size_t i = 0; i < d; ++i) u[i] += w * centered[s][i];
        }
        const double len = std::sqrt(dot(u, u));
        if (len > 0.0)
          for (double& x : u) x /= len;
      }
      pairs.push_back({eig.values[j], std::move(u)});
    }
  }

  double max_var = 0.0;
  for (const auto& p : pairs) max_var = std::max(max_var, p.variance);
  const double var_tol = 1e-12 * max_var;
  std::erase_if(pairs, [&](const Pair& p) { return !(p.variance > var_tol) || max_var <= 0.0; });
  for (auto& p : pairs) fix_sign(p.vec);

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.variance > b.variance; });
  // Within runs of equal variance, order by first nonzero coordinate.
  for (std::size_t lo = 0; lo < pairs.size();) {
    std::size_t hi = lo + 1;
    while (hi < pairs.size() && pairs[lo].variance - pairs[hi].variance <= var_tol) ++hi;
    std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(lo),
                     pairs.begin() + static_cast<std::ptrdiff_t>(hi),
                     [](const Pair& a, const Pair& b) {
                       return first_nonzero(a.vec) < first_nonzero(b.vec);
                     });
    lo = hi;
  }

  for (auto& p : pairs) {
    if (basis.components.size() == k) break;
    const double len = orthogonalize(p.vec, basis.components);
    if (len <= 1e-6) continue;
    for (double& x : p.vec) x /= len;
    fix_sign(p.vec);
    basis.components.push_back(std::move(p.vec));
    basis.variances.push_back(p.variance);
  }

  for (std::size_t j = 0; j < d && basis.components.size() < k; ++j) {
    std::vector<double> e(d, 0.0);
    e[j] = 1.0;
    const double len = orthogonalize(e, basis.components);
    if (len <= 1e-6) continue;
    for (double& x : e) x /= len;
    fix_sign(e);
    basis.components.push_back(std::move(e));
    basis.variances.push_back(0.0);
  }
  return basis;
}

std::vector<double> pca_project(std::span<const double> v, const PcaBasis& basis) {
  if (v.size() != basis.dim()) {
    throw Error("pca_project: vector dimension " + std::to_string(v.size()) +
                " does not match basis dimension " + std::to_string(basis.dim()));
  }
  std::vector<double> centered(v.begin(), v.end());
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] -= basis.mean[i];
  std::vector<double> out(basis.rank());
  for (std::size_t c = 0; c < basis.rank(); ++c) out[c] = dot(basis.components[c], centered);
  return out;
}

std::vector<std::vector<double>> pca_project_all(const std::vector<std::span<const double>>& vs,
                                                 const PcaBasis& basis, ExecutionPolicy policy) {
  for (const auto& v : vs) {
    if (v.size() != basis.dim()) throw Error("pca_project: dimension mismatch");
  }
  std::vector<std::vector<double>> out(vs.size());
  const auto count = static_cast<std::ptrdiff_t>(vs.size());
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)] = pca_project(vs[static_cast<std::size_t>(i)], basis);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)] = pca_project(vs[static_cast<std::size_t>(i)], basis);
  }
  return out;
}

}  // namespace trackgraph
