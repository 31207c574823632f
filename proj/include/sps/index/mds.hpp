#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sps/common.hpp"

namespace sps {

// Classical (Torgerson) multidimensional scaling: double-center the squared
// distance matrix, keep the top `dim` positive eigenpairs, scale eigenvectors
// by the square roots of their eigenvalues. Axes for non-positive eigenvalues
// are dropped (columns stay zero), the usual treatment of non-Euclidean input.
inline Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dim) {
    const Eigen::Index n = dist.rows();
    if (n == 0 || dist.cols() != n) throw Error(Errc::malformed_input, "distance matrix not square");
    if (dim < 1) throw Error(Errc::malformed_input, "embedding dimension must be positive");
    if (((dist - dist.transpose()).cwiseAbs().maxCoeff()) > 1e-9)
        throw Error(Errc::malformed_input, "distance matrix not symmetric");
    if (dist.diagonal().cwiseAbs().maxCoeff() > 1e-12)
        throw Error(Errc::malformed_input, "distance matrix diagonal not zero");
    if (dist.minCoeff() < 0.0)
        throw Error(Errc::malformed_input, "negative distance");

    Eigen::MatrixXd d2 = dist.cwiseProduct(dist);
    Eigen::MatrixXd j =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
    Eigen::MatrixXd b = -0.5 * j * d2 * j;
    b = 0.5 * (b + b.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success) throw Error(Errc::malformed_input, "eigendecomposition failed");

    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, dim);
    double top = es.eigenvalues()(n - 1);
    double tol = 1e-9 * std::max(1.0, std::abs(top));
    int col = 0;
    for (Eigen::Index i = n - 1; i >= 0 && col < dim; i--) {
        double ev = es.eigenvalues()(i);
        if (ev <= tol) break;
        coords.col(col++) = es.eigenvectors().col(i) * std::sqrt(ev);
    }
    return coords;
}

}  // namespace sps
