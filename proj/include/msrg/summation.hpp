#pragma once

#include <cstddef>
#include <span>

namespace msrg {

namespace detail {
inline constexpr std::size_t kPairwiseBlock = 16;
}

/// Pairwise (tree) summation of term(i) for i in [begin, end). The split points
/// depend only on the range, so the result is reproducible for a given input.
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  const std::size_t count = end - begin;
  if (count <= detail::kPairwiseBlock) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + count / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

inline double pairwise_sum(std::span<const double> values) {
  return pairwise_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace msrg
