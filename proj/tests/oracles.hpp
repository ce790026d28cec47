#pragma once

// Slow, independent reference implementations used only by the tests.

#include "ghicast/image.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/matrix.hpp"
#include "ghicast/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ghicast::oracle {

/// Triple-loop product.
inline Matrix matmul(const Matrix& a, const Matrix& b)
{
    Matrix c = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            long double s = 0.0L;
            for (Index p = 0; p < a.cols(); ++p) {
                s += static_cast<long double>(a(i, p)) * b(p, j);
            }
            c(i, j) = static_cast<double>(s);
        }
    }
    return c;
}

struct Svd {
    std::vector<double> singular_values; // descending
    Matrix v;                            // columns follow singular_values
};

/// Singular values and right vectors from a cyclic Jacobi eigendecomposition
/// of X^T X, carried out in extended precision.
inline Svd jacobi_svd(const Matrix& x)
{
    const Index n = x.cols();
    std::vector<long double> a(std::size_t(n * n), 0.0L);
    auto A = [&](Index i, Index j) -> long double& { return a[std::size_t(i * n + j)]; };
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            long double s = 0.0L;
            for (Index r = 0; r < x.rows(); ++r) {
                s += static_cast<long double>(x(r, i)) * x(r, j);
            }
            A(i, j) = s;
            A(j, i) = s;
        }
    }
    std::vector<long double> v(std::size_t(n * n), 0.0L);
    auto V = [&](Index i, Index j) -> long double& { return v[std::size_t(i * n + j)]; };
    for (Index i = 0; i < n; ++i) {
        V(i, i) = 1.0L;
    }

    for (int sweep = 0; sweep < 100; ++sweep) {
        long double off = 0.0L;
        long double diag = 0.0L;
        for (Index i = 0; i < n; ++i) {
            diag += A(i, i) * A(i, i);
            for (Index j = i + 1; j < n; ++j) {
                off += A(i, j) * A(i, j);
            }
        }
        if (off <= 1e-36L * diag) {
            break;
        }
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0L) {
                    continue;
                }
                const long double theta = (A(q, q) - A(p, p)) / (2.0L * A(p, q));
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L);
                const long double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const long double akp = A(k, p);
                    const long double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const long double apk = A(p, k);
                    const long double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Index k = 0; k < n; ++k) {
                    const long double vkp = V(k, p);
                    const long double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index i, Index j) { return A(i, i) > A(j, j); });
    Svd out;
    out.v.resize(n, n);
    for (Index c = 0; c < n; ++c) {
        const Index src = order[std::size_t(c)];
        out.singular_values.push_back(static_cast<double>(std::sqrt(std::max(A(src, src), 0.0L))));
        for (Index r = 0; r < n; ++r) {
            out.v(r, c) = static_cast<double>(V(r, src));
        }
    }
    return out;
}

inline double naive_squared_distance(const double* a, const double* b, Index dim)
{
    double s = 0.0;
    for (Index i = 0; i < dim; ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return s;
}

/// Exhaustive K-nearest rows ordered by (distance, row).
inline std::vector<std::size_t> brute_neighbours(const RowMatrix& x, const double* query, int k)
{
    std::vector<std::pair<double, std::size_t>> all;
    for (Index r = 0; r < x.rows(); ++r) {
        all.emplace_back(naive_squared_distance(x.row(r).data(), query, x.cols()), std::size_t(r));
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (int i = 0; i < k; ++i) {
        out.push_back(all[std::size_t(i)].second);
    }
    return out;
}

inline double brute_knn_predict(const RowMatrix& x, const std::vector<double>& y, const double* query, int k)
{
    double s = 0.0;
    for (std::size_t r : brute_neighbours(x, query, k)) {
        s += y[r];
    }
    return s / k;
}

/// Anchor indices t for which frames t-m+1..t+h exist and every spacing in
/// that run is positive and at most 1.5 cadence.
inline std::vector<std::size_t> brute_window_anchors(const std::vector<Timestamp>& times, int m, int h, Seconds cadence)
{
    std::vector<std::size_t> anchors;
    const auto n = static_cast<long>(times.size());
    for (long t = 0; t < n; ++t) {
        const long first = t - (m - 1);
        const long last = t + h;
        if (first < 0 || last >= n) {
            continue;
        }
        bool ok = true;
        for (long i = first + 1; i <= last; ++i) {
            const auto gap = times[std::size_t(i)] - times[std::size_t(i - 1)];
            if (gap <= Seconds{0} || gap.count() * 2 > cadence.count() * 3) {
                ok = false;
            }
        }
        if (ok) {
            anchors.push_back(std::size_t(t));
        }
    }
    return anchors;
}

/// Repeatedly takes the globally closest unused (image, reading) pair within
/// tolerance; ties go to the earlier reading, then the earlier image.
inline std::vector<std::pair<std::size_t, std::size_t>> brute_align(const std::vector<Timestamp>& images,
    const std::vector<Timestamp>& readings, Seconds tolerance)
{
    std::vector<bool> image_used(images.size(), false);
    std::vector<bool> reading_used(readings.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    while (true) {
        long best_dist = -1;
        std::size_t bi = 0;
        std::size_t br = 0;
        for (std::size_t r = 0; r < readings.size(); ++r) {
            for (std::size_t i = 0; i < images.size(); ++i) {
                if (image_used[i] || reading_used[r]) {
                    continue;
                }
                const long d = std::labs((images[i] - readings[r]).count());
                if (d > tolerance.count()) {
                    continue;
                }
                if (best_dist < 0 || d < best_dist) {
                    best_dist = d;
                    bi = i;
                    br = r;
                }
            }
        }
        if (best_dist < 0) {
            break;
        }
        image_used[bi] = true;
        reading_used[br] = true;
        pairs.emplace_back(bi, br);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

/// Area average by explicit supersampling: every source pixel is split into
/// side x side cells and every output pixel covers height x width cells.
inline std::vector<double> supersampled_downsample(const RgbImage& image, int side)
{
    const long h = image.height;
    const long w = image.width;
    std::vector<double> out(std::size_t(side) * side * 3, 0.0);
    for (int oy = 0; oy < side; ++oy) {
        for (int ox = 0; ox < side; ++ox) {
            for (int ch = 0; ch < 3; ++ch) {
                long sum = 0;
                for (long fy = oy * h; fy < (oy + 1) * h; ++fy) {
                    for (long fx = ox * w; fx < (ox + 1) * w; ++fx) {
                        sum += image.at(int(fy / side), int(fx / side), ch);
                    }
                }
                out[(std::size_t(oy) * side + ox) * 3 + ch] = double(sum) / double(h * w) / 255.0;
            }
        }
    }
    return out;
}

/// Walks one tree by hand.
inline double trace_tree(const regress::DecisionTree& tree, const double* row)
{
    int node = 0;
    while (tree.nodes[std::size_t(node)].feature >= 0) {
        const auto& n = tree.nodes[std::size_t(node)];
        node = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[std::size_t(node)].value;
}

/// Frobenius distance between X and its rank-k reconstruction from V_k.
inline double reconstruction_error(const Matrix& x, const Matrix& vk)
{
    return (x - x * vk * vk.transpose()).norm();
}

} // namespace ghicast::oracle
