#include "rprae/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rprae {

Tensor cosine_matrix(const EmbeddingTable& table, const std::vector<std::string>& words) {
    const int n = static_cast<int>(words.size());
    if (n == 0) throw ShapeError("cosine_matrix: empty word list");
    std::vector<const std::vector<double>*> vecs;
    std::vector<double> norms;
    vecs.reserve(static_cast<size_t>(n));
    for (const auto& w : words) {
        const auto& v = table.at(w);
        double nn = 0;
        for (double x : v) nn += x * x;
        if (nn <= 0) throw NumericError("cosine_matrix: zero vector for '" + w + "'");
        vecs.push_back(&v);
        norms.push_back(std::sqrt(nn));
    }
    Tensor M = Tensor::zeros({n, n});
    for (int i = 0; i < n; ++i) {
        M.data()[static_cast<size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double d = 0;
            const auto& a = *vecs[static_cast<size_t>(i)];
            const auto& b = *vecs[static_cast<size_t>(j)];
            for (size_t t = 0; t < a.size(); ++t) d += a[t] * b[t];
            const double c = d / (norms[static_cast<size_t>(i)] * norms[static_cast<size_t>(j)]);
            M.data()[static_cast<size_t>(i) * n + j] = c;
            M.data()[static_cast<size_t>(j) * n + i] = c;
        }
    }
    return M;
}

void jacobi_eigh(const Tensor& sym, std::vector<double>& eigenvalues, Tensor& eigenvectors, double tol) {
    if (sym.rank() != 2 || sym.dim(0) != sym.dim(1)) throw ShapeError("jacobi_eigh: need a square matrix");
    const int n = sym.dim(0);
    Tensor A = sym;
    Tensor V = Tensor::zeros({n, n});
    for (int i = 0; i < n; ++i) V.data()[static_cast<size_t>(i) * n + i] = 1.0;

    auto at = [n](Tensor& M, int r, int c) -> double& { return M.data()[static_cast<size_t>(r) * n + c]; };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(A, p, q) * at(A, p, q);
        if (std::sqrt(off) <= tol) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(A, p, q);
                if (std::fabs(apq) <= tol * 1e-3) continue;
                const double app = at(A, p, p), aqq = at(A, q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(A, k, p), akq = at(A, k, q);
                    at(A, k, p) = c * akp - s * akq;
                    at(A, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(A, p, k), aqk = at(A, q, k);
                    at(A, p, k) = c * apk - s * aqk;
                    at(A, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(V, k, p), vkq = at(V, k, q);
                    at(V, k, p) = c * vkp - s * vkq;
                    at(V, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) diag[static_cast<size_t>(i)] = at(A, i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return diag[static_cast<size_t>(a)] > diag[static_cast<size_t>(b)]; });

    eigenvalues.assign(static_cast<size_t>(n), 0.0);
    eigenvectors = Tensor::zeros({n, n});
    for (int c = 0; c < n; ++c) {
        const int src = order[static_cast<size_t>(c)];
        eigenvalues[static_cast<size_t>(c)] = diag[static_cast<size_t>(src)];
        for (int r = 0; r < n; ++r)
            eigenvectors.data()[static_cast<size_t>(r) * n + c] = at(V, r, src);
    }
}

PcaResult pca_project(const EmbeddingTable& table, const std::vector<std::string>& words, int k) {
    const int n = static_cast<int>(words.size());
    const int d = table.dim();
    if (n == 0) throw ShapeError("pca_project: empty word list");
    if (k <= 0 || k > std::min(n, d))
        throw ShapeError("pca_project: k = " + std::to_string(k) + " exceeds min(#words, dim) = " +
                         std::to_string(std::min(n, d)));

    Tensor X = Tensor::zeros({n, d});
    for (int i = 0; i < n; ++i) {
        const auto& v = table.at(words[static_cast<size_t>(i)]);
        for (int j = 0; j < d; ++j) X.data()[static_cast<size_t>(i) * d + j] = v[static_cast<size_t>(j)];
    }
    for (int j = 0; j < d; ++j) {
        double mean = 0;
        for (int i = 0; i < n; ++i) mean += X.data()[static_cast<size_t>(i) * d + j];
        mean /= n;
        for (int i = 0; i < n; ++i) X.data()[static_cast<size_t>(i) * d + j] -= mean;
    }

    Tensor C = Tensor::zeros({d, d});
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            double sum = 0;
            for (int i = 0; i < n; ++i)
                sum += X.data()[static_cast<size_t>(i) * d + a] * X.data()[static_cast<size_t>(i) * d + b];
            C.data()[static_cast<size_t>(a) * d + b] = sum;
            C.data()[static_cast<size_t>(b) * d + a] = sum;
        }

    std::vector<double> eig;
    Tensor V;
    jacobi_eigh(C, eig, V);

    PcaResult res;
    res.components = Tensor::zeros({d, k});
    res.variance.assign(static_cast<size_t>(k), 0.0);
    const double denom = n > 1 ? n - 1.0 : 1.0;
    for (int c = 0; c < k; ++c) {
        // Sign convention: largest-magnitude loading positive.
        int arg = 0;
        double best = 0;
        for (int r = 0; r < d; ++r) {
            const double v = std::fabs(V.data()[static_cast<size_t>(r) * d + c]);
            if (v > best) {
                best = v;
                arg = r;
            }
        }
        const double sign = V.data()[static_cast<size_t>(arg) * d + c] < 0 ? -1.0 : 1.0;
        for (int r = 0; r < d; ++r)
            res.components.data()[static_cast<size_t>(r) * k + c] =
                sign * V.data()[static_cast<size_t>(r) * d + c];
        res.variance[static_cast<size_t>(c)] = std::max(0.0, eig[static_cast<size_t>(c)]) / denom;
    }

    res.coords = Tensor::zeros({n, k});
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c) {
            double sum = 0;
            for (int j = 0; j < d; ++j)
                sum += X.data()[static_cast<size_t>(i) * d + j] *
                       res.components.data()[static_cast<size_t>(j) * k + c];
            res.coords.data()[static_cast<size_t>(i) * k + c] = sum;
        }
    return res;
}

}  // namespace rprae
