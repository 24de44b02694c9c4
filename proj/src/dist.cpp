#include "mim/dist.hpp"

#include <cmath>
#include <string>

#include "mim/errors.hpp"

namespace mim {

namespace {
constexpr double kSumTolerance = 1e-12;

void check_table(const std::vector<double>& p, const char* what) {
    if (p.empty()) throw SchemaError(std::string(what) + " has empty alphabet");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0)) {
            throw SchemaError(std::string(what) + " entry " + std::to_string(i) +
                              " is negative or NaN");
        }
        sum += p[i];
    }
    if (std::fabs(sum - 1.0) > kSumTolerance) {
        throw NormalizationError(std::string(what) + " sums to " + std::to_string(sum));
    }
}
}  // namespace

Dist Dist::uniform(std::size_t n) {
    return Dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Dist Dist::point_mass(std::size_t n, std::size_t at) {
    std::vector<double> p(n, 0.0);
    p[at] = 1.0;
    return Dist(std::move(p));
}

Dist Dist::checked(std::vector<double> p, const char* what) {
    Dist d(std::move(p));
    d.validate(what);
    return d;
}

void Dist::validate(const char* what) const { check_table(probs, what); }

JointDist JointDist::checked(std::size_t r, std::size_t c, std::vector<double> p,
                             const char* what) {
    if (p.size() != r * c) {
        throw SchemaError(std::string(what) + " table has " + std::to_string(p.size()) +
                          " entries, expected " + std::to_string(r * c));
    }
    JointDist j;
    j.rows = r;
    j.cols = c;
    j.probs = std::move(p);
    j.validate(what);
    return j;
}

void JointDist::validate(const char* what) const {
    if (rows == 0 || cols == 0) throw SchemaError(std::string(what) + " has empty alphabet");
    check_table(probs, what);
}

Dist JointDist::row_marginal() const {
    std::vector<double> m(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m[r] += at(r, c);
    return Dist(std::move(m));
}

Dist JointDist::col_marginal() const {
    std::vector<double> m(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m[c] += at(r, c);
    return Dist(std::move(m));
}

JointDist JointDist::transposed() const {
    JointDist t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    return t;
}

Channel Channel::identity(std::size_t n) {
    std::vector<Dist> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(Dist::point_mass(n, i));
    return Channel(std::move(rows));
}

Channel Channel::constant(std::size_t n_in, std::size_t n_out, std::size_t at) {
    std::vector<Dist> rows(n_in, Dist::point_mass(n_out, at));
    return Channel(std::move(rows));
}

Channel Channel::deterministic(const std::vector<std::size_t>& map, std::size_t n_out) {
    std::vector<Dist> rows;
    rows.reserve(map.size());
    for (std::size_t v : map) rows.push_back(Dist::point_mass(n_out, v));
    return Channel(std::move(rows));
}

bool Channel::is_deterministic() const {
    for (const Dist& row : rows)
        for (double p : row.probs)
            if (p != 0.0 && p != 1.0) return false;
    return true;
}

void Channel::validate(const char* what) const {
    if (rows.empty()) throw SchemaError(std::string(what) + " has no rows");
    const std::size_t width = rows.front().size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw SchemaError(std::string(what) + " row " + std::to_string(r) +
                              " width mismatch");
        }
        rows[r].validate(what);
    }
}

Dist push_forward(const Dist& p, const Channel& q) {
    std::vector<double> out(q.output_size(), 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] == 0.0) continue;
        for (std::size_t y = 0; y < out.size(); ++y) out[y] += p[x] * q.rows[x][y];
    }
    return Dist(std::move(out));
}

JointDist joint_from_channel(const Dist& p, const Channel& q) {
    JointDist j(p.size(), q.output_size());
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = 0; y < j.cols; ++y) j.at(x, y) = p[x] * q.rows[x][y];
    return j;
}

JointDist apply_row_channel(const JointDist& j, const Channel& a) {
    JointDist out(a.output_size(), j.cols);
    for (std::size_t x = 0; x < j.rows; ++x)
        for (std::size_t z = 0; z < out.rows; ++z) {
            const double w = a.rows[x][z];
            if (w == 0.0) continue;
            for (std::size_t y = 0; y < j.cols; ++y) out.at(z, y) += w * j.at(x, y);
        }
    return out;
}

Channel condition_rows(const JointDist& j, const Dist& fallback) {
    std::vector<Dist> rows;
    rows.reserve(j.rows);
    const Dist marginal = j.row_marginal();
    for (std::size_t r = 0; r < j.rows; ++r) {
        std::vector<double> row(j.cols, 0.0);
        if (marginal[r] > 0.0) {
            for (std::size_t c = 0; c < j.cols; ++c) row[c] = j.at(r, c) / marginal[r];
        } else {
            row = fallback.probs;
        }
        rows.push_back(Dist(std::move(row)));
    }
    return Channel(std::move(rows));
}

}  // namespace mim
