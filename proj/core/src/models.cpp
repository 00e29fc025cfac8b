#include "qcomp/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace qcomp {
namespace {

int bit(std::size_t basis, int L, int j) {
    return static_cast<int>((basis >> (L - 1 - j)) & 1u);
}

double zval(std::size_t basis, int L, int j) {
    return bit(basis, L, j) ? 1.0 : -1.0;
}

std::size_t flip(std::size_t basis, int L, int j) {
    return basis ^ (std::size_t{1} << (L - 1 - j));
}

}  // namespace

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Xxz: return "xxz";
        case ModelKind::Pxp: return "pxp";
        case ModelKind::Qlm: return "qlm";
    }
    throw std::logic_error("unreachable model kind");
}

ModelKind model_from_name(const std::string& name) {
    if (name == "xxz") return ModelKind::Xxz;
    if (name == "pxp") return ModelKind::Pxp;
    if (name == "qlm") return ModelKind::Qlm;
    throw std::invalid_argument("unknown model name: " + name);
}

void validate(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::Xxz:
            if (spec.L < 2 || spec.L % 2 != 0)
                throw std::invalid_argument("xxz needs even L >= 2");
            return;
        case ModelKind::Pxp:
            if (spec.L < 4 || spec.L % 2 != 0)
                throw std::invalid_argument("pxp needs even L >= 4");
            return;
        case ModelKind::Qlm:
            if (spec.L < 4 || spec.L % 4 != 0)
                throw std::invalid_argument("qlm needs L divisible by 4");
            return;
    }
    throw std::logic_error("unreachable model kind");
}

DenseOperator hamiltonian(const ModelSpec& spec) {
    validate(spec);
    const int L = spec.L;
    if (L > kMaxOperatorQubits)
        throw resource_limit_error("hamiltonian: L exceeds dense-operator ceiling");
    DenseOperator h = make_operator(L, Matrix::Zero(dim_of(L), dim_of(L)));
    const std::size_t dim = h.dim();

    switch (spec.kind) {
        case ModelKind::Xxz:
            // sum over bonds of Sx Sx + Sy Sy + (1/2) Sz Sz with S = sigma/2;
            // the literal periodic sum keeps the L=2 bond twice.
            for (std::size_t b = 0; b < dim; ++b) {
                double diag = 0.0;
                for (int j = 0; j < L; ++j) {
                    const int k = (j + 1) % L;
                    diag += zval(b, L, j) * zval(b, L, k) / 8.0;
                    if (bit(b, L, j) != bit(b, L, k))
                        h.mat(flip(flip(b, L, j), L, k), b) += 0.5;
                }
                h.mat(b, b) += diag;
            }
            break;
        case ModelKind::Pxp:
            for (std::size_t b = 0; b < dim; ++b)
                for (int j = 0; j < L; ++j)
                    if (bit(b, L, (j + L - 1) % L) == 0 && bit(b, L, (j + 1) % L) == 0)
                        h.mat(flip(b, L, j), b) += 1.0;
            break;
        case ModelKind::Qlm:
            // -(sigma+_m s+ sigma-_{m+1} + h.c.) per matter site m
            for (std::size_t b = 0; b < dim; ++b)
                for (int m = 0; m < L / 2; ++m) {
                    const int ml = 2 * m, g = 2 * m + 1, mr = (2 * m + 2) % L;
                    if (bit(b, L, ml) == 0 && bit(b, L, g) == 0 && bit(b, L, mr) == 1) {
                        const std::size_t b2 = flip(flip(flip(b, L, ml), L, g), L, mr);
                        h.mat(b2, b) += -1.0;
                        h.mat(b, b2) += -1.0;
                    }
                }
            break;
    }
    return h;
}

namespace {

struct EigCacheEntry {
    HermEig eig;
};

const HermEig& cached_eig(const ModelSpec& spec) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, EigCacheEntry> cache;
    const std::pair<int, int> key{static_cast<int>(spec.kind), spec.L};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        EigCacheEntry entry{herm_eig(hamiltonian(spec).mat)};
        it = cache.emplace(key, std::move(entry)).first;
        if (cache.size() > 8) {
            for (auto jt = cache.begin(); jt != cache.end();)
                jt = (jt != it && jt->first.second > 10) ? cache.erase(jt) : std::next(jt);
        }
    }
    return it->second.eig;
}

}  // namespace

DenseOperator exact_propagator(const ModelSpec& spec, double t) {
    validate(spec);
    const HermEig& eig = cached_eig(spec);
    Vector phases(eig.evals.size());
    for (Eigen::Index k = 0; k < eig.evals.size(); ++k)
        phases(k) = std::exp(cplx(0.0, -eig.evals(k) * t));
    Matrix u = eig.evecs * phases.asDiagonal() * eig.evecs.adjoint();
    return make_operator(spec.L, std::move(u));
}

std::vector<std::vector<double>> charge_diagonals(const ModelSpec& spec) {
    validate(spec);
    const int L = spec.L;
    const std::size_t dim = dim_of(L);
    std::vector<std::vector<double>> out;

    switch (spec.kind) {
        case ModelKind::Xxz: {
            std::vector<double> q(dim);
            for (std::size_t b = 0; b < dim; ++b) {
                double s = 0.0;
                for (int j = 0; j < L; ++j) s += zval(b, L, j) / 2.0;
                q[b] = s;
            }
            out.push_back(std::move(q));
            break;
        }
        case ModelKind::Pxp:
            for (int j = 0; j < L; ++j) {
                std::vector<double> q(dim);
                for (std::size_t b = 0; b < dim; ++b)
                    q[b] = bit(b, L, j) & bit(b, L, (j + 1) % L);
                out.push_back(std::move(q));
            }
            break;
        case ModelKind::Qlm:
            for (int m = 0; m < L / 2; ++m) {
                std::vector<double> q(dim);
                const double stagger = (m % 2 == 0) ? 1.0 : -1.0;
                for (std::size_t b = 0; b < dim; ++b)
                    q[b] = (zval(b, L, 2 * m) + zval(b, L, (2 * m + L - 1) % L) -
                            zval(b, L, 2 * m + 1) + stagger) /
                           2.0;
                out.push_back(std::move(q));
            }
            break;
    }
    return out;
}

std::vector<DenseOperator> charges(const ModelSpec& spec) {
    validate(spec);
    if (spec.L > kMaxOperatorQubits)
        throw resource_limit_error("charges: L exceeds dense-operator ceiling");
    std::vector<DenseOperator> ops;
    for (const auto& diag : charge_diagonals(spec)) {
        DenseOperator q = make_operator(spec.L, Matrix::Zero(diag.size(), diag.size()));
        for (std::size_t b = 0; b < diag.size(); ++b) q.mat(b, b) = diag[b];
        ops.push_back(std::move(q));
    }
    return ops;
}

SectorTable sector_table(const ModelSpec& spec) {
    const auto diags = charge_diagonals(spec);
    const std::size_t dim = dim_of(spec.L);

    std::map<std::vector<double>, std::vector<int>> groups;
    std::vector<double> label(diags.size());
    for (std::size_t b = 0; b < dim; ++b) {
        for (std::size_t c = 0; c < diags.size(); ++c) label[c] = diags[c][b];
        groups[label].push_back(static_cast<int>(b));
    }

    SectorTable table;
    table.L = spec.L;
    for (auto& [lab, idx] : groups) table.sectors.push_back({lab, std::move(idx)});

    auto all_zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    std::sort(table.sectors.begin(), table.sectors.end(),
              [&](const Sector& a, const Sector& b) {
                  if (a.indices.size() != b.indices.size())
                      return a.indices.size() > b.indices.size();
                  const bool za = all_zero(a.label), zb = all_zero(b.label);
                  if (za != zb) return za;
                  return a.indices.front() < b.indices.front();
              });
    return table;
}

namespace {

std::vector<std::size_t> to_rows(const std::vector<int>& idx) {
    return std::vector<std::size_t>(idx.begin(), idx.end());
}

}  // namespace

BlockMask SectorTable::mask_d1() const {
    BlockMask mask;
    mask.L = L;
    auto rows = to_rows(largest().indices);
    mask.rects.push_back({rows, rows});
    return mask;
}

BlockMask SectorTable::mask_dr() const {
    BlockMask mask;
    mask.L = L;
    for (std::size_t k = 1; k < sectors.size(); ++k) {
        auto rows = to_rows(sectors[k].indices);
        mask.rects.push_back({rows, rows});
    }
    return mask;
}

BlockMask SectorTable::mask_o1() const {
    BlockMask mask;
    mask.L = L;
    auto first = to_rows(largest().indices);
    std::vector<std::size_t> rest;
    for (std::size_t k = 1; k < sectors.size(); ++k)
        for (int i : sectors[k].indices) rest.push_back(static_cast<std::size_t>(i));
    std::sort(rest.begin(), rest.end());
    mask.rects.push_back({first, rest});
    mask.rects.push_back({rest, first});
    return mask;
}

BlockMask SectorTable::mask_or() const {
    BlockMask mask;
    mask.L = L;
    for (std::size_t k = 1; k < sectors.size(); ++k)
        for (std::size_t l = 1; l < sectors.size(); ++l) {
            if (k == l) continue;
            mask.rects.push_back({to_rows(sectors[k].indices), to_rows(sectors[l].indices)});
        }
    return mask;
}

BlockMask SectorTable::mask_full() const {
    BlockMask mask;
    mask.L = L;
    std::vector<std::size_t> all(dim_of(L));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    mask.rects.push_back({all, all});
    return mask;
}

std::string sector_table_json(const SectorTable& table) {
    std::ostringstream os;
    os << "[";
    for (std::size_t k = 0; k < table.sectors.size(); ++k) {
        const Sector& s = table.sectors[k];
        os << (k ? "," : "") << "{\"label\":[";
        for (std::size_t c = 0; c < s.label.size(); ++c)
            os << (c ? "," : "") << s.label[c];
        os << "],\"indices\":[";
        for (std::size_t i = 0; i < s.indices.size(); ++i)
            os << (i ? "," : "") << s.indices[i];
        os << "]}";
    }
    os << "]";
    return os.str();
}

StateVector named_state(const ModelSpec& spec, const std::string& name) {
    validate(spec);
    const int L = spec.L;
    if (name == "NEEL") {
        std::size_t idx = 0;
        for (int j = 0; j < L; j += 2) idx |= std::size_t{1} << (L - 1 - j);
        return basis_state(L, idx);
    }
    if (name == "NEEL_QLM") {
        if (spec.kind != ModelKind::Qlm)
            throw std::invalid_argument("NEEL_QLM requires the qlm model");
        std::size_t idx = 0;
        for (int m = 1; m < L / 2; m += 2) idx |= std::size_t{1} << (L - 1 - 2 * m);
        return basis_state(L, idx);
    }
    throw std::invalid_argument("unknown state name: " + name);
}

}  // namespace qcomp
