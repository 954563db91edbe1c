#include "sdoa/covariance.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdoa/error.hpp"

namespace sdoa {

CovarianceMatrix sample_covariance(const ComplexSnapshots& y, std::optional<ColumnRange> columns)
{
    const ColumnRange cols = columns.value_or(ColumnRange{0, y.sample_count()});
    require(cols.start >= 0 && cols.start + cols.count <= y.sample_count(),
            "covariance column range outside the block");
    if (cols.count < 1)
        throw PreconditionError("sample covariance needs at least one snapshot");
    const auto block = y.samples.middleCols(cols.start, cols.count);
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(y.channel_count(), y.channel_count());
    R.selfadjointView<Eigen::Lower>().rankUpdate(block, 1.0 / static_cast<double>(cols.count));
    Eigen::MatrixXcd full = R.selfadjointView<Eigen::Lower>();
    return {std::move(full), cols.count};
}

CoArrayObservation coarray_observation(const CovarianceMatrix& r, const SensorSet& s,
                                       RedundancyRule rule)
{
    const auto K = static_cast<Eigen::Index>(s.size());
    if (r.R.rows() != K || r.R.cols() != K)
        throw PreconditionError("covariance dimension " + std::to_string(r.R.rows()) +
                                " does not match " + std::to_string(K) + " sensors");
    const CoherentSegment seg = coherent_segment(difference_coarray(s));
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(seg.count());
    std::vector<int> hits(static_cast<std::size_t>(seg.count()), 0);
    const auto& pos = s.positions();
    // vec(R) order: row index i runs fastest.
    for (Eigen::Index j = 0; j < K; ++j) {
        for (Eigen::Index i = 0; i < K; ++i) {
            const int mx = pos[static_cast<std::size_t>(i)].ix - pos[static_cast<std::size_t>(j)].ix;
            const int my = pos[static_cast<std::size_t>(i)].iy - pos[static_cast<std::size_t>(j)].iy;
            if (!seg.contains(mx, my))
                continue;
            const int idx = seg.index(mx, my);
            auto& n = hits[static_cast<std::size_t>(idx)];
            if (rule == RedundancyRule::KeepFirst && n > 0)
                continue;
            sum(idx) += r.R(i, j);
            ++n;
        }
    }
    for (Eigen::Index idx = 0; idx < sum.size(); ++idx)
        sum(idx) /= static_cast<double>(hits[static_cast<std::size_t>(idx)]);
    return {std::move(sum), seg};
}

SmoothedCovariance spatial_smoothing(const CoArrayObservation& z, int wx, int wy)
{
    const auto& seg = z.segment;
    if (wx < 1 || wy < 1 || wx > seg.width() || wy > seg.height())
        throw PreconditionError("smoothing window " + std::to_string(wx) + "x" + std::to_string(wy) +
                                " exceeds the " + std::to_string(seg.width()) + "x" +
                                std::to_string(seg.height()) + " coherent segment");
    const int lx = seg.width() - wx + 1;
    const int ly = seg.height() - wy + 1;
    const Eigen::Index m = static_cast<Eigen::Index>(wx) * wy;
    Eigen::MatrixXcd windows(m, static_cast<Eigen::Index>(lx) * ly);
    Eigen::Index col = 0;
    for (int sy = 0; sy < ly; ++sy) {
        for (int sx = 0; sx < lx; ++sx) {
            for (int v = 0; v < wy; ++v)
                for (int u = 0; u < wx; ++u)
                    windows(static_cast<Eigen::Index>(v) * wx + u, col) =
                        z.z1((sy + v) * seg.width() + sx + u);
            ++col;
        }
    }
    const int L = lx * ly;
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(m, m);
    R.selfadjointView<Eigen::Lower>().rankUpdate(windows, 1.0 / L);
    Eigen::MatrixXcd full = R.selfadjointView<Eigen::Lower>();
    return {std::move(full), wx, wy, L};
}

SmoothedCovariance spatial_smoothing(const CoArrayObservation& z)
{
    return spatial_smoothing(z, z.segment.mx + 1, z.segment.my + 1);
}

Eigen::MatrixXcd effective_manifold(const Eigen::MatrixXcd& a)
{
    const Eigen::Index K = a.rows();
    Eigen::MatrixXcd out(K * K, a.cols());
    for (Eigen::Index m = 0; m < a.cols(); ++m)
        for (Eigen::Index j = 0; j < K; ++j)
            out.col(m).segment(j * K, K) = std::conj(a(j, m)) * a.col(m);
    return out;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& m)
{
    std::ostringstream buf;
    buf.precision(17);
    buf << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            buf << (j ? " " : "") << m(i, j).real() << ' ' << m(i, j).imag();
        buf << '\n';
    }
    os << buf.str();
}

Eigen::MatrixXcd read_matrix(std::istream& is)
{
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0)
        throw DataError("matrix dump: malformed size header");
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double re = 0.0;
            double im = 0.0;
            if (!(is >> re >> im))
                throw DataError("matrix dump: truncated at entry (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
            m(i, j) = {re, im};
        }
    return m;
}

} // namespace sdoa
