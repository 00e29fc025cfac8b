#include "qcomp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qcomp {

namespace {

constexpr int kMaxEigQubits = 10;

double zdiag(std::size_t basis, int L, int j) { return bit_of(basis, L, j) ? 1.0 : -1.0; }

void check_normalized(const StateVector& s) {
    if (std::abs(s.amp.squaredNorm() - 1.0) > 1e-8)
        throw std::invalid_argument("state is not normalized");
}

ObservableSeries evolve_series(const DenseOperator& step, const StateVector& initial, int n_times,
                               const std::string& provenance,
                               double (*observe)(const StateVector&, const ModelSpec*),
                               const ModelSpec* spec) {
    if (step.L != initial.L) throw std::invalid_argument("step and state sizes differ");
    if (n_times < 1) throw std::invalid_argument("series needs at least one time point");
    ObservableSeries out;
    out.provenance = provenance;
    StateVector s = initial;
    for (int n = 0; n < n_times; ++n) {
        if (n > 0) s.amp = step.mat * s.amp;
        out.times.push_back(n);
        out.values.push_back(observe(s, spec));
    }
    return out;
}

std::FILE* open_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("cannot open " + path);
    return f;
}

}  // namespace

double imbalance(const StateVector& s) {
    check_normalized(s);
    double total = 0.0;
    for (std::size_t b = 0; b < s.dim(); ++b) {
        const double w = std::norm(s.amp[static_cast<Eigen::Index>(b)]);
        if (w == 0.0) continue;
        double stag = 0.0;
        for (int j = 0; j < s.L; ++j) stag += (j % 2 == 0 ? 1.0 : -1.0) * zdiag(b, s.L, j);
        total += w * stag;
    }
    return total;
}

double string_order(const ModelSpec& spec, const StateVector& s) {
    validate(spec);
    if (spec.kind != ModelKind::Qlm)
        throw std::invalid_argument("string order is defined on the gauge chain only");
    if (spec.L != s.L) throw std::invalid_argument("spec and state sizes differ");
    check_normalized(s);
    double total = 0.0;
    for (std::size_t b = 0; b < s.dim(); ++b) {
        const double w = std::norm(s.amp[static_cast<Eigen::Index>(b)]);
        if (w == 0.0) continue;
        double links = 0.0;
        for (int j = 1; j < s.L; j += 2) links += zdiag(b, s.L, j);
        total += w * links;
    }
    return total / (s.L / 2);
}

ObservableSeries imbalance_series(const DenseOperator& step, const StateVector& initial,
                                  int n_times, const std::string& provenance) {
    return evolve_series(step, initial, n_times, provenance,
                         [](const StateVector& s, const ModelSpec*) { return imbalance(s); },
                         nullptr);
}

ObservableSeries string_order_series(const ModelSpec& spec, const DenseOperator& step,
                                     const StateVector& initial, int n_times,
                                     const std::string& provenance) {
    return evolve_series(
        step, initial, n_times, provenance,
        [](const StateVector& s, const ModelSpec* m) { return string_order(*m, s); }, &spec);
}

OtocGrid otoc_grid(const DenseOperator& step, const Sector& block, int n_times, int i) {
    if (n_times < 1) throw std::invalid_argument("otoc grid needs at least one time point");
    const int L = step.L;
    if (i < 0) i = L / 2;
    if (i >= L) throw std::invalid_argument("otoc probe site out of range");

    const auto nb = static_cast<Eigen::Index>(block.indices.size());
    if (nb == 0) throw std::invalid_argument("otoc block is empty");

    OtocGrid grid;
    grid.i = i;
    for (int j = 0; j < L; ++j) grid.sites.push_back(j);

    // Block columns of step^n; column c belongs to basis state block.indices[c].
    Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(dim_of(L)), nb);
    for (Eigen::Index c = 0; c < nb; ++c)
        cols(static_cast<Eigen::Index>(block.indices[static_cast<std::size_t>(c)]), c) = 1.0;

    for (int n = 0; n < n_times; ++n) {
        if (n > 0) cols = step.mat * cols;
        // w = cols^dag diag(z_i) cols, the block-restricted Z_i(n).
        Matrix scaled = cols;
        for (Eigen::Index row = 0; row < scaled.rows(); ++row)
            scaled.row(row) *= zdiag(static_cast<std::size_t>(row), L, i);
        const Matrix w = cols.adjoint() * scaled;

        std::vector<double> vals(static_cast<std::size_t>(L), 0.0);
        for (Eigen::Index a = 0; a < nb; ++a)
            for (Eigen::Index b = 0; b < nb; ++b) {
                const double w2 = std::norm(w(a, b));
                if (w2 == 0.0) continue;
                const std::size_t ba = block.indices[static_cast<std::size_t>(a)];
                const std::size_t bb = block.indices[static_cast<std::size_t>(b)];
                for (int j = 0; j < L; ++j) {
                    const double d = zdiag(bb, L, j) - zdiag(ba, L, j);
                    if (d != 0.0) vals[static_cast<std::size_t>(j)] += w2 * d * d;
                }
            }
        for (double& v : vals) v /= static_cast<double>(nb);
        grid.times.push_back(n);
        grid.values.push_back(std::move(vals));
    }
    return grid;
}

Eigen::MatrixXd error_map(const DenseOperator& c, const DenseOperator& u) {
    if (c.L != u.L) throw std::invalid_argument("error map: operator sizes differ");
    return (c.mat - u.mat).cwiseAbs2();
}

RestrictedDistances restricted_distance_report(const DenseOperator& c, const DenseOperator& u,
                                               const SectorTable& table) {
    auto masked = [&](const BlockMask& mask) {
        return mask.entries() == 0 ? 0.0 : epsilon_restricted(c, u, mask);
    };
    RestrictedDistances r;
    r.d1 = masked(table.mask_d1());
    r.dr = masked(table.mask_dr());
    r.o1 = masked(table.mask_o1());
    r.or_ = masked(table.mask_or());
    return r;
}

std::vector<EigenOverlap> eigen_overlaps(const DenseOperator& op, const StateVector& ref) {
    if (op.L > kMaxEigQubits)
        throw resource_limit_error("eigen_overlaps: L exceeds the diagonalization ceiling");
    if (op.L != ref.L) throw std::invalid_argument("operator and state sizes differ");
    check_normalized(ref);

    const UnitaryEig eig = unitary_eig(op.mat);
    std::vector<EigenOverlap> out;
    for (Eigen::Index k = 0; k < eig.phases.size(); ++k) {
        EigenOverlap o;
        o.phase = std::arg(eig.phases[k]);
        o.overlap = std::abs(eig.evecs.col(k).dot(ref.amp));
        out.push_back(o);
    }
    std::sort(out.begin(), out.end(),
              [](const EigenOverlap& a, const EigenOverlap& b) { return a.phase < b.phase; });
    return out;
}

double angle_sum_diagnostic(const CircuitTemplate& tpl, const std::vector<double>& params) {
    const bool pxp_rows = tpl.arch == Arch::BlockedPxp ||
                          ((tpl.arch == Arch::Trotter1 || tpl.arch == Arch::Trotter2) &&
                           tpl.model == ModelKind::Pxp);
    if (!pxp_rows) throw std::invalid_argument("angle sum is defined for PXP-row circuits");
    check_params(tpl, params);
    double sum = 0.0;
    for (double p : params) sum += p;
    return sum;
}

std::map<int, double> size_extrapolation_report(const CircuitTemplate& tpl,
                                                const std::vector<double>& params,
                                                ModelKind model, double t,
                                                const std::vector<int>& sizes) {
    check_params(tpl, params);
    std::map<int, double> out;
    for (int L : sizes) {
        const CircuitTemplate lifted = lift_size(tpl, L);
        out[L] = epsilon(lifted, params, exact_propagator(ModelSpec{model, L}, t));
    }
    return out;
}

void write_series_csv(const ObservableSeries& series, const ReportMeta& meta,
                      const std::string& path) {
    std::FILE* f = open_csv(path);
    std::fputs("time,value,L,M,arch,epsilon\n", f);
    for (std::size_t k = 0; k < series.times.size(); ++k)
        std::fprintf(f, "%.17g,%.17g,%d,%d,%s,%.17g\n", series.times[k], series.values[k], meta.L,
                     meta.M, meta.arch.c_str(), meta.epsilon);
    std::fclose(f);
}

void write_otoc_csv(const OtocGrid& grid, const std::string& path) {
    std::FILE* f = open_csv(path);
    std::fputs("time,site,value\n", f);
    for (std::size_t n = 0; n < grid.times.size(); ++n)
        for (std::size_t j = 0; j < grid.sites.size(); ++j)
            std::fprintf(f, "%.17g,%d,%.17g\n", grid.times[n], grid.sites[j], grid.values[n][j]);
    std::fclose(f);
}

void write_error_map_csv(const Eigen::MatrixXd& map, const std::string& path) {
    std::FILE* f = open_csv(path);
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
        for (Eigen::Index c = 0; c < map.cols(); ++c)
            std::fprintf(f, c + 1 == map.cols() ? "%.17g" : "%.17g,", map(r, c));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

}  // namespace qcomp
