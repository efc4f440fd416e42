#pragma once

#include <string>
#include <vector>

#include "rprae/embedding.hpp"
#include "rprae/tensor.hpp"

namespace rprae {

// Pairwise cosine similarity in the given word order: symmetric, unit
// diagonal. Missing words and zero vectors are errors.
Tensor cosine_matrix(const EmbeddingTable& table, const std::vector<std::string>& words);

struct PcaResult {
    Tensor coords;                 // [n, k] projected coordinates, one row per word
    Tensor components;             // [dim, k] right singular directions, columns ordered
    std::vector<double> variance;  // per-component variance, non-increasing
};

// PCA of the mean-centered word vectors via eigendecomposition of the
// covariance (cyclic Jacobi, offdiagonal tolerance 1e-10). Components are
// ordered by decreasing variance; each component's largest-magnitude loading
// is made positive so the output is deterministic up to nothing.
PcaResult pca_project(const EmbeddingTable& table, const std::vector<std::string>& words, int k);

// Jacobi eigensolver for a symmetric matrix: returns eigenvalues (descending)
// and matching eigenvectors as columns of V.
void jacobi_eigh(const Tensor& sym, std::vector<double>& eigenvalues, Tensor& eigenvectors,
                 double tol = 1e-10);

}  // namespace rprae
