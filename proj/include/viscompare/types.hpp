#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace viscompare {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// x -> h(x)
using ScalarField = std::function<double(const Vec&)>;
/// x -> b(x) in R^N
using VectorField = std::function<Vec(const Vec&)>;
/// x -> M(x), N x n
using MatrixField = std::function<Mat(const Vec&)>;

inline std::string format_point(const Vec& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

/// An evaluator threw; carries the point at which it was called.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, Vec point)
        : std::runtime_error(what + " at x = " + format_point(point)), point_(std::move(point)) {}

    const Vec& point() const { return point_; }

private:
    Vec point_;
};

/// A structural hypothesis needed by an operation does not hold.
class HypothesisError : public std::runtime_error {
public:
    HypothesisError(std::string predicate, const std::string& detail)
        : std::runtime_error(predicate + ": " + detail), predicate_(std::move(predicate)) {}

    const std::string& predicate() const { return predicate_; }

private:
    std::string predicate_;
};

/// A discretization cannot be made monotone.
class DiscretizationError : public std::runtime_error {
public:
    DiscretizationError(const std::string& what, Vec node, double required_lf)
        : std::runtime_error(what + " at node " + format_point(node)),
          node_(std::move(node)),
          required_lf_(required_lf) {}

    const Vec& node() const { return node_; }
    double required_lf() const { return required_lf_; }

private:
    Vec node_;
    double required_lf_;
};

inline ScalarField constant_field(double c) {
    return [c](const Vec&) { return c; };
}

inline VectorField zero_vector_field(int dim) {
    return [dim](const Vec&) { return Vec::Zero(dim).eval(); };
}

inline MatrixField constant_matrix_field(Mat m) {
    return [m = std::move(m)](const Vec&) { return m; };
}

/// Calls `field(x)` and rethrows any failure as EvaluationError naming x.
template <class Field>
auto evaluate_at(const Field& field, const Vec& x) -> decltype(field(x)) {
    try {
        return field(x);
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError(e.what(), x);
    }
}

/// Largest |eigenvalue| of a symmetric matrix.
inline double spectral_norm_symmetric(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Operator 2-norm of a general (possibly non-square) matrix.
inline double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == m.cols() && m.isApprox(m.transpose(), 0.0)) return spectral_norm_symmetric(m);
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

inline double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double max_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace viscompare
