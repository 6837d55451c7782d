#pragma once

#include "popdyn/analysis.hpp"
#include "popdyn/delays.hpp"
#include "popdyn/game.hpp"
#include "popdyn/revision.hpp"
#include "popdyn/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace popdyn {

struct GameSpec {
    std::string type;  // "rps" or "linear"
    double a = 1.0;
    double b = 2.0;
    Mat matrix;                // linear games
    std::vector<Vec> ne;       // optional equilibria for linear games
};

// One experiment as read from a JSON config file. Unset optionals are resolved
// by resolve(): rho by grid calibration, h by the delay-scaled default.
struct ExperimentConfig {
    GameSpec game;
    std::string delay_generator;      // "abs-diff" when no explicit matrix is given
    std::optional<Mat> delay_matrix;
    std::optional<double> rho;        // nullopt means "auto"
    double lambda0 = 1.0;
    double delta = 0.25;
    bool tuner = false;
    Vec x0;
    std::optional<double> h;
    double horizon = 100.0;
    std::string out_dir;
    int stride = 0;                   // 0 picks the default
    RunThresholds thresholds;
    std::string scheme = "euler";     // or "heun"

    bool operator==(const ExperimentConfig& other) const;
};

// Parses a config file; throws ConfigError with file/position context.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");

// JSON form that re-parses to an equal config (used for the metadata sidecar).
std::string config_to_json(const ExperimentConfig& config);

// A config with every knob materialized, ready to simulate.
struct ResolvedExperiment {
    ExperimentConfig config;  // rho and h filled in
    GameDefinition game;
    ProtocolParams params;
    DelayMatrix delays;
    CertifiedConstants consts;
    Scheme scheme = Scheme::kEuler;
    double h = 0.0;
    int stride = 0;
};

ResolvedExperiment resolve(const ExperimentConfig& config);

// Grid resolution and safety factor for rho = "auto".
inline constexpr int kRhoAutoGrid = 200;
inline constexpr double kRhoSafety = 0.999;

}  // namespace popdyn
