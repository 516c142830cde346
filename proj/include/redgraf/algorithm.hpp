#pragma once

#include <cstddef>
#include <string_view>

namespace redgraf {

enum class AlgorithmKind { sdmmfd, sdfd, cwtm, rvo };

/// Upper-case names: "SDMMFD", "SDFD", "CWTM", "RVO".
std::string_view to_string(AlgorithmKind kind);
/// Case-insensitive. Throws ConfigError for unknown names.
AlgorithmKind parse_algorithm(std::string_view name);

/// Graph robustness the algorithm needs: SDMMFD (2d+1)F+1, SDFD and CWTM
/// 2F+1, RVO (d+1)F+1.
std::size_t required_robustness(AlgorithmKind kind, std::size_t d, std::size_t F);

/// SDMMFD and SDFD carry an auxiliary state y.
constexpr bool uses_auxiliary(AlgorithmKind kind) {
    return kind == AlgorithmKind::sdmmfd || kind == AlgorithmKind::sdfd;
}

}  // namespace redgraf
