#pragma once

#include "diskmix/harness/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace diskmix {

struct RegisteredExperiment {
    std::string id;
    std::string description;
    nlohmann::json config;
};

namespace detail {

inline nlohmann::json step_radial_experiment(int N) {
    const std::string id = "E2-N" + std::to_string(N);
    return {
        {"experiment_id", id},
        {"description", "Random mean-free step-radial datum of level " + std::to_string(N) + "; geometric rate compared across levels"},
        {"datum", {{"kind", "step-radial"}, {"level", N}}},
        {"kappas", {0.2}},
        {"time_grid", {{"t_min", 8}, {"t_max", 256}}},
        {"fits", {{{"metric", "geometric"}, {"kappa", 0.2}}, {{"metric", "hminus1"}}}},
        {"output_dir", "out/" + id},
        {"seed", 20 + N},
    };
}

} // namespace detail

/// Built-in experiments; configs/ holds the same definitions as JSON files.
inline const std::vector<RegisteredExperiment>& experiment_registry() {
    static const std::vector<RegisteredExperiment> registry = [] {
        using nlohmann::json;
        std::vector<json> configs;
        configs.push_back({
            {"experiment_id", "E1"},
            {"description", "Half-disk datum: geometric scale and H^-1 decay rates"},
            {"datum", {{"kind", "half-disk"}}},
            {"kappas", {0.2}},
            {"time_grid", {{"t_min", 8}, {"t_max", 1024}}},
            {"geometric", {{"t_max", 256}}},
            {"fits",
             {{{"metric", "geometric"}, {"kappa", 0.2}, {"window", {8, 256}}, {"expected_slope", {-1.25, -0.8}}},
              {{"metric", "hminus1"}, {"window", {16, 1024}}, {"expected_slope", {-0.65, -0.4}}}}},
            {"output_dir", "out/E1"},
            {"seed", 1},
        });
        for (int N = 1; N <= 3; ++N) configs.push_back(detail::step_radial_experiment(N));
        configs.push_back({
            {"experiment_id", "E3"},
            {"description", "Continuous modal datum r cos(theta): geometric rate"},
            {"datum", {{"kind", "modal"}, {"modes", {{{"m", 1}, {"profile", "linear"}}}}}},
            {"kappas", {0.2}},
            {"time_grid", {{"t_min", 8}, {"t_max", 256}}},
            {"fits",
             {{{"metric", "geometric"}, {"kappa", 0.2}, {"expected_slope", {-1.25, -0.75}}}, {{"metric", "hminus1"}}}},
            {"output_dir", "out/E3"},
            {"seed", 1},
        });
        configs.push_back({
            {"experiment_id", "E4"},
            {"description", "Hoelder datum r|2r-1|^(1/2) cos(theta): geometric and H^-1 rates"},
            {"datum", {{"kind", "holder"}, {"alpha", 0.5}}},
            {"kappas", {0.2}},
            {"time_grid", {{"t_min", 8}, {"t_max", 1024}}},
            {"geometric", {{"t_max", 256}}},
            {"fits", {{{"metric", "geometric"}, {"kappa", 0.2}}, {{"metric", "hminus1"}}}},
            {"output_dir", "out/E4"},
            {"seed", 1},
        });
        configs.push_back({
            {"experiment_id", "E5"},
            {"description", "Stationary radial annulus: neither meter changes in time"},
            {"datum", {{"kind", "stationary-annulus"}}},
            {"kappas", {0.2}},
            {"time_grid", {{"t_min", 8}, {"t_max", 256}}},
            {"expectations",
             {{"constant_metrics", {{{"metric", "eps_upper"}, {"tolerance", 1e-10}}, {{"metric", "hminus1"}, {"tolerance", 1e-10}}}}}},
            {"output_dir", "out/E5"},
            {"seed", 1},
        });
        configs.push_back({
            {"experiment_id", "E6"},
            {"description", "Accuracy pathology: decay at kappa = 0.3, unmixed at kappa = 0.15"},
            {"datum", {{"kind", "kappa-pathology"}, {"kappa", 0.3}}},
            {"kappas", {0.3, 0.15}},
            {"time_grid", {{"t_min", 8}, {"t_max", 1024}}},
            {"geometric", {{"eps_max", 0.25}}},
            {"fits", {{{"metric", "geometric"}, {"kappa", 0.3}, {"expected_slope", {-1.25, -0.8}}}}},
            {"expectations", {{"unmixed_kappas", {0.15}}}},
            {"output_dir", "out/E6"},
            {"seed", 1},
        });
        std::vector<RegisteredExperiment> out;
        for (auto& c : configs) out.push_back({c["experiment_id"], c["description"], c});
        return out;
    }();
    return registry;
}

inline const RegisteredExperiment& find_experiment(const std::string& id) {
    for (const auto& e : experiment_registry())
        if (e.id == id) return e;
    throw ConfigError("unknown experiment '" + id + "'");
}

inline ExperimentConfig registered_config(const std::string& id) { return parse_config(find_experiment(id).config); }

} // namespace diskmix
