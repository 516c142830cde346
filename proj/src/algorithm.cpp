#include "redgraf/algorithm.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "redgraf/errors.hpp"

namespace redgraf {

std::string_view to_string(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::sdmmfd: return "SDMMFD";
        case AlgorithmKind::sdfd: return "SDFD";
        case AlgorithmKind::cwtm: return "CWTM";
        case AlgorithmKind::rvo: return "RVO";
    }
    return "unknown";
}

AlgorithmKind parse_algorithm(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "SDMMFD") return AlgorithmKind::sdmmfd;
    if (upper == "SDFD") return AlgorithmKind::sdfd;
    if (upper == "CWTM") return AlgorithmKind::cwtm;
    if (upper == "RVO") return AlgorithmKind::rvo;
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::size_t required_robustness(AlgorithmKind kind, std::size_t d, std::size_t F) {
    switch (kind) {
        case AlgorithmKind::sdmmfd: return (2 * d + 1) * F + 1;
        case AlgorithmKind::sdfd:
        case AlgorithmKind::cwtm: return 2 * F + 1;
        case AlgorithmKind::rvo: return (d + 1) * F + 1;
    }
    return 1;
}

}  // namespace redgraf
