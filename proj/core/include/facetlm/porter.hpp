#pragma once

#include <string>
#include <string_view>

namespace facetlm {

/// Porter (1980) suffix-stripping stemmer, following the reference C
/// implementation distributed by M. Porter (including its "bli" and "logi"
/// step-2 rules). Words of length <= 2 are returned unchanged. Characters
/// other than a/e/i/o/u (and y, contextually) are treated as consonants.
[[nodiscard]] std::string porter_stem(std::string_view word);

}  // namespace facetlm
