#pragma once

#include <cstddef>
#include <vector>

namespace mim {

// Finite probability distribution over an index alphabet.
// Invariants: entries >= 0, sum within 1e-12 of 1.
struct Dist {
    std::vector<double> probs;

    Dist() = default;
    explicit Dist(std::vector<double> p) : probs(std::move(p)) {}

    static Dist uniform(std::size_t n);
    static Dist point_mass(std::size_t n, std::size_t at);
    // Validates and returns, throwing NormalizationError / SchemaError.
    static Dist checked(std::vector<double> p, const char* what = "Dist");

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }

    void validate(const char* what = "Dist") const;
};

// Joint distribution over a product of two finite alphabets, row-major.
struct JointDist {
    std::size_t rows = 0;  // first alphabet
    std::size_t cols = 0;  // second alphabet
    std::vector<double> probs;

    JointDist() = default;
    JointDist(std::size_t r, std::size_t c) : rows(r), cols(c), probs(r * c, 0.0) {}

    static JointDist checked(std::size_t r, std::size_t c, std::vector<double> p,
                             const char* what = "JointDist");

    double& at(std::size_t r, std::size_t c) { return probs[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return probs[r * cols + c]; }

    Dist row_marginal() const;
    Dist col_marginal() const;
    // Transposed copy; mutual information is symmetric under this.
    JointDist transposed() const;

    void validate(const char* what = "JointDist") const;
};

// Conditional distribution table: one Dist per input symbol.
struct Channel {
    std::vector<Dist> rows;

    Channel() = default;
    explicit Channel(std::vector<Dist> r) : rows(std::move(r)) {}

    static Channel identity(std::size_t n);
    static Channel constant(std::size_t n_in, std::size_t n_out, std::size_t at);
    // Deterministic channel from an index map (values into [0, n_out)).
    static Channel deterministic(const std::vector<std::size_t>& map, std::size_t n_out);

    std::size_t input_size() const { return rows.size(); }
    std::size_t output_size() const { return rows.empty() ? 0 : rows.front().size(); }
    bool is_deterministic() const;

    void validate(const char* what = "Channel") const;
};

// p(x) pushed through rows q(y|x): returns p(y).
Dist push_forward(const Dist& p, const Channel& q);

// Joint p(x, y) from marginal p(x) and channel q(y|x).
JointDist joint_from_channel(const Dist& p, const Channel& q);

// Apply a channel to the ROW side of a joint: p'(z, y) = sum_x a(z|x) p(x, y).
JointDist apply_row_channel(const JointDist& j, const Channel& a);

// Bayes rows p(col | row); rows with zero marginal fall back to `fallback`
// (pass the column marginal when in doubt).
Channel condition_rows(const JointDist& j, const Dist& fallback);

}  // namespace mim
