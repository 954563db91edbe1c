#include "sdoa/estimators.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "sdoa/error.hpp"
#include "sdoa/log.hpp"

namespace sdoa {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// J1 keeps the first n-1 elements, J2 the last n-1.
Eigen::MatrixXcd selection(int n, bool first)
{
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(n - 1, n);
    for (int i = 0; i < n - 1; ++i)
        j(i, first ? i : i + 1) = 1.0;
    return j;
}

Eigen::MatrixXd solve_invariance(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                                 InvarianceSolver solver)
{
    if (solver == InvarianceSolver::LeastSquares)
        return lhs.colPivHouseholderQr().solve(rhs);
    const Eigen::Index m = lhs.cols();
    Eigen::MatrixXd c(lhs.rows(), 2 * m);
    c << lhs, rhs;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
    const Eigen::MatrixXd v = svd.matrixV();
    const Eigen::MatrixXd v12 = v.topRightCorner(m, m);
    const Eigen::MatrixXd v22 = v.bottomRightCorner(m, m);
    return -v12 * v22.fullPivLu().inverse();
}

} // namespace

Eigen::MatrixXcd unitary_q(int n)
{
    require(n >= 1, "unitary_q needs n >= 1");
    const double s = 1.0 / std::sqrt(2.0);
    const cdouble j(0.0, 1.0);
    const int h = n / 2;
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < h; ++i) {
        q(i, i) = s;
        q(i, n - h + i) = j * s;
        q(n - 1 - i, i) = s;
        q(n - 1 - i, n - h + i) = -j * s;
    }
    if (n % 2 == 1)
        q(h, h) = 1.0;
    return q;
}

Eigen::MatrixXcd unitary_transform(const Eigen::MatrixXcd& r, int wx, int wy)
{
    require(wx >= 1 && wy >= 1, "unitary_transform: window dimensions must be positive");
    require(r.rows() == wx * wy && r.cols() == wx * wy,
            "unitary_transform: matrix size does not match Wx*Wy");
    const Eigen::MatrixXcd q = kron(unitary_q(wy), unitary_q(wx));
    return q.adjoint() * r * q;
}

std::vector<Direction> unitary_esprit_2d(const Eigen::MatrixXcd& r, int wx, int wy,
                                         const EspritOptions& opt)
{
    require(wx >= 2 && wy >= 2, "unitary_esprit_2d needs a window of at least 2x2");
    const int m = opt.sources;
    const int limit = std::min(wx * (wy - 1), wy * (wx - 1));
    if (m < 1 || m >= limit)
        throw PreconditionError("unitary_esprit_2d: source count must satisfy 1 <= m < " +
                                std::to_string(limit));
    require(opt.frequency > 0.0 && opt.c > 0.0 && opt.spacing > 0.0,
            "unitary_esprit_2d: frequency, c and spacing must be positive");
    const double kd = 2.0 * kPi * opt.frequency / opt.c * opt.spacing;
    if (kd > kPi)
        throw PreconditionError("unitary_esprit_2d: frequency above the spatial Nyquist limit "
                                "aliases the spatial frequencies");

    const Eigen::MatrixXd cov = unitary_transform(r, wx, wy).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    if (es.info() != Eigen::Success)
        throw EstimationError("unitary_esprit_2d: eigendecomposition did not converge");
    const Eigen::MatrixXd signal = es.eigenvectors().rightCols(m);

    const Eigen::MatrixXcd qm = kron(unitary_q(wy), unitary_q(wx));
    const cdouble j(0.0, 1.0);
    const auto shift_pair = [&](const Eigen::MatrixXcd& j1, const Eigen::MatrixXcd& j2,
                                const Eigen::MatrixXcd& qs) {
        const Eigen::MatrixXd k1 = (qs.adjoint() * (j1 + j2) * qm).real();
        const Eigen::MatrixXd k2 = (qs.adjoint() * (j * (j1 - j2)) * qm).real();
        return solve_invariance(k1 * signal, k2 * signal, opt.solver);
    };
    const Eigen::MatrixXcd iy = Eigen::MatrixXcd::Identity(wy, wy);
    const Eigen::MatrixXcd ix = Eigen::MatrixXcd::Identity(wx, wx);
    const Eigen::MatrixXd psi_x = shift_pair(kron(iy, selection(wx, true)), kron(iy, selection(wx, false)),
                                             kron(unitary_q(wy), unitary_q(wx - 1)));
    const Eigen::MatrixXd psi_y = shift_pair(kron(selection(wy, true), ix), kron(selection(wy, false), ix),
                                             kron(unitary_q(wy - 1), unitary_q(wx)));

    // Joint eigendecomposition pairs the x and y spatial frequencies of each source.
    const Eigen::MatrixXcd joint = psi_x.cast<cdouble>() + j * psi_y.cast<cdouble>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(joint);
    if (ces.info() != Eigen::Success)
        throw EstimationError("unitary_esprit_2d: joint eigendecomposition did not converge");

    std::vector<Direction> out;
    for (Eigen::Index i = 0; i < m; ++i) {
        const cdouble lam = ces.eigenvalues()(i);
        const double ux = 2.0 * std::atan(lam.real()) / kd;
        const double uy = 2.0 * std::atan(lam.imag()) / kd;
        if (std::hypot(ux, uy) > 1.0)
            warn("unitary_esprit_2d: |sin(elevation)| estimate above 1, clamped to the horizon");
        out.push_back(direction_from_cosines(ux, uy));
    }
    return out;
}

std::vector<Direction> unitary_esprit_2d(const SmoothedCovariance& r, const EspritOptions& opt)
{
    return unitary_esprit_2d(r.R, r.wx, r.wy, opt);
}

} // namespace sdoa
