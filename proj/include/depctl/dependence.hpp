#pragma once

#include "depctl/distributions.hpp"
#include "depctl/parallel.hpp"
#include "depctl/random_stream.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace depctl {

enum class CopulaKind {
    independence,
    comonotone,
    countermonotone,        // dim 2 only
    gaussian_exchangeable,  // param = rho
    gaussian_ar1,           // param = rho
    clayton,                // param = theta >= 0
};

struct CopulaSpec {
    CopulaKind kind = CopulaKind::independence;
    double param = 0.0;
    std::size_t dim = 1;

    static CopulaSpec independence(std::size_t dim);
    static CopulaSpec comonotone(std::size_t dim);
    static CopulaSpec countermonotone();
    static CopulaSpec gaussian_exchangeable(double rho, std::size_t dim);
    static CopulaSpec gaussian_ar1(double rho, std::size_t dim);
    static CopulaSpec clayton(double theta, std::size_t dim);

    bool operator==(const CopulaSpec&) const = default;
};

std::string kind_name(CopulaKind k);
CopulaKind copula_kind_from_name(const std::string& name);
std::string describe(const CopulaSpec& spec);
void validate(const CopulaSpec& spec);

bool is_gaussian_family(const CopulaSpec& spec);
/// Correlation matrix (row-major dim x dim) of a Gaussian-family copula;
/// Independence maps to the identity.
std::vector<double> gaussian_correlation(const CopulaSpec& spec);

/// Row-major matrix of `rows` vectors of dimension `dim`.
struct UniformMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
    std::vector<double> column(std::size_t c) const;
};

/// Draws one copula vector per call. Gaussian-family kinds (including
/// Independence) consume one standard normal per coordinate, so specs that
/// differ only in correlation stay on common random numbers.
class CopulaSampler {
public:
    explicit CopulaSampler(const CopulaSpec& spec);
    void draw(RandomStream& stream, double* out) const;
    const CopulaSpec& spec() const noexcept { return spec_; }

private:
    CopulaSpec spec_;
    std::vector<double> chol_;  // lower-triangular factor for exchangeable
};

/// n uniform vectors; rows are generated in chunks on substreams.
UniformMatrix sample_copula(const CopulaSpec& spec, const RandomStream& stream, std::size_t n,
                            Exec exec = Exec::parallel);

/// Coordinate-wise quantile transform. Returns rows in the same layout.
UniformMatrix norta(const UniformMatrix& uniforms, const std::vector<DistributionSpec>& marginals);

struct ProcessSpec {
    std::size_t T = 1;
    std::size_t coords = 1;
    /// One shared entry, `coords` entries (constant in time) or T * coords
    /// entries indexed t * coords + i.
    std::vector<DistributionSpec> marginals;
    CopulaSpec temporal = CopulaSpec::independence(1);  // dim T, per coordinate
    CopulaSpec spatial = CopulaSpec::independence(1);   // dim coords, per time step
    /// Permits both axes dependent (Gaussian families only, separable).
    bool allow_both = false;

    const DistributionSpec& marginal(std::size_t t, std::size_t i) const;
    bool operator==(const ProcessSpec&) const = default;
};

void validate(const ProcessSpec& spec);

/// Independent paths, each a T x coords matrix.
struct PathMatrix {
    std::size_t T = 0;
    std::size_t coords = 0;
    std::size_t paths = 0;
    std::vector<double> values;  // index (p * T + t) * coords + i

    double operator()(std::size_t p, std::size_t t, std::size_t i) const {
        return values[(p * T + t) * coords + i];
    }
    /// Weighted path sums sum_{t,i} w[t*coords+i] X; empty weights mean all ones.
    std::vector<double> weighted_sums(const std::vector<double>& weights = {}) const;
};

/// Path p uses stream.substream(p).
PathMatrix gen_process(const ProcessSpec& spec, const RandomStream& stream, std::size_t paths,
                       Exec exec = Exec::parallel);

/// A pair of process specs certified supermodular-comparable (lo <=sm hi).
struct SmPair {
    ProcessSpec lo;
    ProcessSpec hi;
    std::vector<std::string> certificates;
};

/// Certifies lo <=sm hi by construction or throws: ContractError when the
/// marginals differ, ParameterError when no certificate applies.
SmPair sm_pair(const ProcessSpec& lo, const ProcessSpec& hi);

} // namespace depctl
