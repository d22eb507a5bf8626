#include "facetlm/smoothing.hpp"

#include <algorithm>
#include <sstream>

#include "facetlm/error.hpp"

namespace facetlm {

std::string_view to_string(SmoothingMethod m)
{
    switch (m) {
    case SmoothingMethod::dirichlet: return "dirichlet";
    case SmoothingMethod::jelinek_mercer: return "jm";
    case SmoothingMethod::absolute_discounting: return "ad";
    }
    return "dirichlet";
}

SmoothingMethod parse_smoothing_method(std::string_view name)
{
    if (name == "dirichlet") {
        return SmoothingMethod::dirichlet;
    }
    if (name == "jm" || name == "jelinek_mercer") {
        return SmoothingMethod::jelinek_mercer;
    }
    if (name == "ad" || name == "absolute_discounting") {
        return SmoothingMethod::absolute_discounting;
    }
    throw ConfigError("unknown smoothing method '" + std::string(name) + "' (expected dirichlet|jm|ad)");
}

void SmoothingSpec::validate() const
{
    switch (method) {
    case SmoothingMethod::dirichlet:
        if (!(mu > 0.0)) {
            throw ConfigError("Dirichlet mu must be > 0");
        }
        break;
    case SmoothingMethod::jelinek_mercer:
        if (!(lambda_jm >= 0.0 && lambda_jm <= 1.0)) {
            throw ConfigError("Jelinek-Mercer lambda must lie in [0, 1]");
        }
        break;
    case SmoothingMethod::absolute_discounting:
        if (!(delta_ad > 0.0 && delta_ad < 1.0)) {
            throw ConfigError("absolute-discounting delta must lie in (0, 1)");
        }
        break;
    }
}

std::string SmoothingSpec::describe() const
{
    std::ostringstream out;
    out.precision(17);
    out << to_string(method) << ':';
    switch (method) {
    case SmoothingMethod::dirichlet: out << "mu=" << mu; break;
    case SmoothingMethod::jelinek_mercer: out << "lambda=" << lambda_jm; break;
    case SmoothingMethod::absolute_discounting: out << "delta=" << delta_ad; break;
    }
    return out.str();
}

double smoothed_probability(SmoothingSpec const& spec, std::uint64_t count, SourceShape shape, double collection_prob)
{
    auto const c = static_cast<double>(count);
    auto const len = static_cast<double>(shape.length);
    switch (spec.method) {
    case SmoothingMethod::dirichlet: return (c + spec.mu * collection_prob) / (len + spec.mu);
    case SmoothingMethod::jelinek_mercer:
        return spec.lambda_jm * (c / len) + (1.0 - spec.lambda_jm) * collection_prob;
    case SmoothingMethod::absolute_discounting:
        return std::max(c - spec.delta_ad, 0.0) / len
            + spec.delta_ad * static_cast<double>(shape.unique_terms) / len * collection_prob;
    }
    return 0.0;
}

double unseen_coefficient(SmoothingSpec const& spec, SourceShape shape)
{
    auto const len = static_cast<double>(shape.length);
    switch (spec.method) {
    case SmoothingMethod::dirichlet: return spec.mu / (len + spec.mu);
    case SmoothingMethod::jelinek_mercer: return 1.0 - spec.lambda_jm;
    case SmoothingMethod::absolute_discounting:
        return spec.delta_ad * static_cast<double>(shape.unique_terms) / len;
    }
    return 0.0;
}

}  // namespace facetlm
