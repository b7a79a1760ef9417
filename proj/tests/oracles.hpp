#pragma once

// Independent reference implementations. Each restates a rule directly and
// by brute force; none of them calls into the code under test beyond plain
// data types.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "vicorpus/annotation.hpp"
#include "vicorpus/report.hpp"

namespace oracle {

using vicorpus::Rect;
using vicorpus::annotate::Unit;

inline Rect union_of(const std::vector<Unit>& units, int from, int to) {
  double x0 = units[from].loose.x, y0 = units[from].loose.y;
  double x1 = x0 + units[from].loose.w, y1 = y0 + units[from].loose.h;
  for (int i = from + 1; i < to; ++i) {
    const Rect& r = units[i].loose;
    x0 = std::min(x0, r.x);
    y0 = std::min(y0, r.y);
    x1 = std::max(x1, r.x + r.w);
    y1 = std::max(y1, r.y + r.h);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

/// A unit joins the open line iff it shares the paragraph key of the line's
/// first unit and its vertical overlap with the union of every unit already
/// on the line is at least `min_overlap` of the shorter height.
inline std::vector<int> lines(const std::vector<Unit>& units, double min_overlap) {
  std::vector<int> ids;
  int start = 0;
  int current = -1;
  for (int i = 0; i < static_cast<int>(units.size()); ++i) {
    bool join = false;
    if (current >= 0 && units[i].para_key == units[start].para_key) {
      const Rect line = union_of(units, start, i);
      const Rect& u = units[i].loose;
      const double top = std::max(line.y, u.y);
      const double bottom = std::min(line.y + line.h, u.y + u.h);
      const double shorter = std::min(line.h, u.h);
      join = shorter > 0 && std::max(0.0, bottom - top) >= min_overlap * shorter;
    }
    if (!join) {
      ++current;
      start = i;
    }
    ids.push_back(current);
  }
  return ids;
}

/// Connected components of the pairwise overlap graph, labelled by first
/// appearance. Agrees with the greedy pass when rows are well separated.
inline std::vector<int> overlap_components(const std::vector<Unit>& units, double min_overlap) {
  const int n = static_cast<int>(units.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Rect& a = units[i].loose;
      const Rect& b = units[j].loose;
      const double ov = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
      if (units[i].para_key == units[j].para_key && ov >= min_overlap * std::min(a.h, b.h)) parent[find(i)] = find(j);
    }
  }
  std::map<int, int> label;
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    auto it = label.emplace(root, static_cast<int>(label.size())).first;
    out.push_back(it->second);
  }
  return out;
}

/// Splits between consecutive units on: a line change, a paragraph change,
/// a LaTeX pseudo-char on either side, any whitespace record with a seq
/// strictly between, or a gap wider than gap_factor x the median loose
/// width of the line.
inline std::vector<int> words(const std::vector<Unit>& units, const std::vector<int>& line_ids,
                              const vicorpus::report::InstrumentationReport& report, double gap_factor) {
  auto median_width = [&](int line) {
    std::vector<double> w;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (line_ids[i] == line) w.push_back(units[i].loose.w);
    }
    std::sort(w.begin(), w.end());
    const std::size_t n = w.size();
    return n % 2 == 1 ? w[n / 2] : (w[n / 2 - 1] + w[n / 2]) / 2;
  };
  std::vector<int> ids;
  int current = -1;
  for (std::size_t i = 0; i < units.size(); ++i) {
    bool split = i == 0;
    if (!split) {
      const Unit& a = units[i - 1];
      const Unit& b = units[i];
      bool space = false;
      for (const auto& c : report.chars) space = space || (c.is_whitespace && c.seq > a.seq && c.seq < b.seq);
      const double gap = b.loose.x - (a.loose.x + a.loose.w);
      split = line_ids[i] != line_ids[i - 1] || a.para_key != b.para_key || a.latex_region >= 0 || b.latex_region >= 0 ||
              space || gap > gap_factor * median_width(line_ids[i]);
    }
    if (split) ++current;
    ids.push_back(current);
  }
  return ids;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with eigenvectors as the matching
/// columns of `vectors` (row-major n x n).
struct Eigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // vectors[k] is the k-th eigenvector
};

inline Eigen jacobi(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0, diag = 0;
    for (int i = 0; i < n; ++i) {
      diag += a[i][i] * a[i][i];
      for (int j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off <= 1e-34 * diag) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  Eigen out;
  for (int k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

/// Dense sample covariance (1 / (n - 1)) of the rows of `x`.
inline std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / static_cast<double>(n);
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (const auto& row : x)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
  for (auto& r : c)
    for (double& e : r) e /= static_cast<double>(n - 1);
  return c;
}

}  // namespace oracle
