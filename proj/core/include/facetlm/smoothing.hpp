#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace facetlm {

enum class SmoothingMethod { dirichlet, jelinek_mercer, absolute_discounting };

[[nodiscard]] std::string_view to_string(SmoothingMethod m);
/// Accepts dirichlet|jm|ad and the long names.
[[nodiscard]] SmoothingMethod parse_smoothing_method(std::string_view name);

/// Only the parameter belonging to `method` is consulted.
struct SmoothingSpec {
    SmoothingMethod method = SmoothingMethod::dirichlet;
    double mu = 2000.0;        // Dirichlet prior mass, > 0
    double lambda_jm = 0.7;    // weight on the item's ML model, in [0, 1]
    double delta_ad = 0.7;     // discount, in (0, 1)

    void validate() const;
    [[nodiscard]] std::string describe() const;

    friend bool operator==(SmoothingSpec const&, SmoothingSpec const&) = default;
};

/// Size of the text a model is induced from.
struct SourceShape {
    std::uint64_t length = 0;
    std::uint64_t unique_terms = 0;
};

/// Smoothed p(w | item) given freq(w, item), the item shape and p_ML_C(w).
[[nodiscard]] double smoothed_probability(SmoothingSpec const& spec, std::uint64_t count, SourceShape shape,
                                          double collection_prob);

/// Factor a with p(w | item) = a * p_ML_C(w) for every w absent from the item.
[[nodiscard]] double unseen_coefficient(SmoothingSpec const& spec, SourceShape shape);

}  // namespace facetlm
