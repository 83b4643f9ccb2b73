#pragma once

#include "gew/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gew
{

/// Provenance carried with every chain and echoed into output headers.
struct ChainMetadata
{
    std::string model;          // preset or family label
    std::string prior;          // per-parameter prior description
    std::uint64_t seed = 0;
    std::uint64_t chain_index = 0;
    std::string dataset_digest;
    std::string v_transform = "log";
};

/// Retained states of one Markov chain.  Row m of `draws` holds
/// (theta1, theta2, theta3, theta4, beta); deviance[m] = -2 ln L(draws[m]).
struct ChainOutput
{
    ChainMetadata meta;
    std::vector<std::array<double, 5>> draws;
    std::vector<double> deviance;
    std::array<std::string, 5> method{}; // sampler used per parameter
    std::vector<std::string> log;        // fallbacks and warnings

    std::size_t size() const { return draws.size(); }
    bool empty() const { return draws.empty(); }
    GewParams state(std::size_t m) const { return GewParams::from_array(draws[m]); }
    std::vector<double> column(Param p) const;
};

inline std::vector<double> ChainOutput::column(Param p) const
{
    std::vector<double> out;
    out.reserve(draws.size());
    for (const auto& row : draws)
        out.push_back(row[index(p)]);
    return out;
}

} // namespace gew
