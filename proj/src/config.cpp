#include "popdyn/config.hpp"

#include "popdyn/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace popdyn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
    throw ConfigError(origin + ": " + msg);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& origin, const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            fail(origin, "unknown key '" + it.key() + "' in " + context);
}

double require_number(const json& obj, const std::string& key, const std::string& origin) {
    if (!obj.contains(key)) fail(origin, "missing key '" + key + "'");
    if (!obj[key].is_number()) fail(origin, "'" + key + "' must be a number");
    return obj[key].get<double>();
}

Vec parse_vector(const json& arr, const std::string& origin, const std::string& context) {
    if (!arr.is_array() || arr.empty()) fail(origin, context + " must be a non-empty array");
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) fail(origin, context + " entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

Mat parse_matrix(const json& arr, const std::string& origin, const std::string& context) {
    if (!arr.is_array() || arr.empty()) fail(origin, context + " must be an array of rows");
    const std::size_t rows = arr.size();
    Mat m;
    for (std::size_t r = 0; r < rows; ++r) {
        const Vec row = parse_vector(arr[r], origin, context + " row");
        if (r == 0) m.resize(rows, row.size());
        if (row.size() != m.cols()) fail(origin, context + " rows must have equal length");
        m.row(static_cast<Eigen::Index>(r)) = row;
    }
    return m;
}

json vector_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Mat& m) {
    json arr = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) arr.push_back(vector_to_json(m.row(r)));
    return arr;
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    auto mat_eq = [](const Mat& a, const Mat& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    if (game.type != other.game.type || game.a != other.game.a || game.b != other.game.b)
        return false;
    if (!mat_eq(game.matrix, other.game.matrix)) return false;
    if (game.ne.size() != other.game.ne.size()) return false;
    for (std::size_t i = 0; i < game.ne.size(); ++i)
        if (!mat_eq(game.ne[i], other.game.ne[i])) return false;
    if (delay_generator != other.delay_generator) return false;
    if (delay_matrix.has_value() != other.delay_matrix.has_value()) return false;
    if (delay_matrix && !mat_eq(*delay_matrix, *other.delay_matrix)) return false;
    return rho == other.rho && lambda0 == other.lambda0 && delta == other.delta &&
           tuner == other.tuner && mat_eq(x0, other.x0) && h == other.h &&
           horizon == other.horizon && out_dir == other.out_dir && stride == other.stride &&
           thresholds.ne_dist == other.thresholds.ne_dist &&
           thresholds.transit_mass == other.thresholds.transit_mass && scheme == other.scheme;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail(origin, e.what());
    }
    if (!root.is_object()) fail(origin, "top level must be an object");
    check_keys(root,
               {"game", "delays", "rho", "lambda0", "delta", "tuner", "x0", "h", "horizon",
                "out_dir", "stride", "thresholds", "scheme"},
               origin, "config");

    ExperimentConfig cfg;

    if (!root.contains("game") || !root["game"].is_object())
        fail(origin, "missing 'game' object");
    const json& g = root["game"];
    if (!g.contains("type") || !g["type"].is_string()) fail(origin, "game.type must be a string");
    cfg.game.type = g["type"].get<std::string>();
    if (cfg.game.type == "rps") {
        check_keys(g, {"type", "a", "b"}, origin, "game");
        cfg.game.a = g.contains("a") ? require_number(g, "a", origin) : 1.0;
        cfg.game.b = g.contains("b") ? require_number(g, "b", origin) : 2.0;
    } else if (cfg.game.type == "linear") {
        check_keys(g, {"type", "matrix", "ne"}, origin, "game");
        if (!g.contains("matrix")) fail(origin, "linear game needs 'matrix'");
        cfg.game.matrix = parse_matrix(g["matrix"], origin, "game.matrix");
        if (g.contains("ne")) {
            for (const json& z : g["ne"])
                cfg.game.ne.push_back(parse_vector(z, origin, "game.ne entry"));
        }
    } else {
        fail(origin, "game.type must be 'rps' or 'linear'");
    }

    if (!root.contains("delays")) fail(origin, "missing 'delays'");
    if (root["delays"].is_string()) {
        cfg.delay_generator = root["delays"].get<std::string>();
        if (cfg.delay_generator != "abs-diff")
            fail(origin, "unknown delay generator '" + cfg.delay_generator + "'");
    } else {
        cfg.delay_matrix = parse_matrix(root["delays"], origin, "delays");
    }

    if (root.contains("rho")) {
        if (root["rho"].is_string()) {
            if (root["rho"].get<std::string>() != "auto")
                fail(origin, "rho must be a number or \"auto\"");
        } else if (root["rho"].is_number()) {
            cfg.rho = root["rho"].get<double>();
            if (*cfg.rho <= 0.0) fail(origin, "rho must be positive");
        } else {
            fail(origin, "rho must be a number or \"auto\"");
        }
    }

    if (root.contains("lambda0")) cfg.lambda0 = require_number(root, "lambda0", origin);
    if (cfg.lambda0 <= 0.0) fail(origin, "lambda0 must be positive");
    if (root.contains("delta")) cfg.delta = require_number(root, "delta", origin);
    if (!(cfg.delta > 0.0 && cfg.delta < 0.5)) fail(origin, "delta must lie in (0, 1/2)");
    if (root.contains("tuner")) {
        if (!root["tuner"].is_boolean()) fail(origin, "tuner must be a boolean");
        cfg.tuner = root["tuner"].get<bool>();
    }

    if (!root.contains("x0")) fail(origin, "missing 'x0'");
    cfg.x0 = parse_vector(root["x0"], origin, "x0");
    if (!in_simplex(cfg.x0)) fail(origin, "x0 must be a simplex point (non-negative, sum 1)");

    if (root.contains("h")) {
        cfg.h = require_number(root, "h", origin);
        if (*cfg.h <= 0.0) fail(origin, "h must be positive");
    }
    if (!root.contains("horizon")) fail(origin, "missing 'horizon'");
    cfg.horizon = require_number(root, "horizon", origin);
    if (cfg.horizon < 0.0) fail(origin, "horizon must be >= 0");

    if (root.contains("out_dir")) {
        if (!root["out_dir"].is_string()) fail(origin, "out_dir must be a string");
        cfg.out_dir = root["out_dir"].get<std::string>();
    }
    if (root.contains("stride")) {
        if (!root["stride"].is_number_integer()) fail(origin, "stride must be an integer");
        cfg.stride = root["stride"].get<int>();
        if (cfg.stride < 0) fail(origin, "stride must be >= 0");
    }
    if (root.contains("thresholds")) {
        const json& th = root["thresholds"];
        check_keys(th, {"ne_dist", "transit_mass"}, origin, "thresholds");
        if (th.contains("ne_dist")) cfg.thresholds.ne_dist = require_number(th, "ne_dist", origin);
        if (th.contains("transit_mass"))
            cfg.thresholds.transit_mass = require_number(th, "transit_mass", origin);
        if (cfg.thresholds.ne_dist <= 0.0 || cfg.thresholds.transit_mass <= 0.0)
            fail(origin, "thresholds must be positive");
    }
    if (root.contains("scheme")) {
        if (!root["scheme"].is_string()) fail(origin, "scheme must be a string");
        cfg.scheme = root["scheme"].get<std::string>();
        if (cfg.scheme != "euler" && cfg.scheme != "heun")
            fail(origin, "scheme must be 'euler' or 'heun'");
    }

    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root;
    json g;
    g["type"] = cfg.game.type;
    if (cfg.game.type == "rps") {
        g["a"] = cfg.game.a;
        g["b"] = cfg.game.b;
    } else {
        g["matrix"] = matrix_to_json(cfg.game.matrix);
        if (!cfg.game.ne.empty()) {
            json ne = json::array();
            for (const Vec& z : cfg.game.ne) ne.push_back(vector_to_json(z));
            g["ne"] = ne;
        }
    }
    root["game"] = g;
    if (cfg.delay_matrix)
        root["delays"] = matrix_to_json(*cfg.delay_matrix);
    else
        root["delays"] = cfg.delay_generator;
    if (cfg.rho)
        root["rho"] = *cfg.rho;
    else
        root["rho"] = "auto";
    root["lambda0"] = cfg.lambda0;
    root["delta"] = cfg.delta;
    root["tuner"] = cfg.tuner;
    root["x0"] = vector_to_json(cfg.x0);
    if (cfg.h) root["h"] = *cfg.h;
    root["horizon"] = cfg.horizon;
    if (!cfg.out_dir.empty()) root["out_dir"] = cfg.out_dir;
    root["stride"] = cfg.stride;
    root["thresholds"] = {{"ne_dist", cfg.thresholds.ne_dist},
                          {"transit_mass", cfg.thresholds.transit_mass}};
    root["scheme"] = cfg.scheme;
    return root.dump(2);
}

ResolvedExperiment resolve(const ExperimentConfig& config) {
    ResolvedExperiment r;
    r.config = config;

    if (config.game.type == "rps") {
        r.game = make_rps_game(config.game.a, config.game.b);
    } else {
        r.game = make_linear_game(config.game.matrix, config.game.ne);
        for (const Vec& z : r.game.ne_set)
            if (z.size() != r.game.n || !in_simplex(z))
                throw ConfigError("resolve: supplied NE is not a simplex point");
        if (r.game.ne_set.empty()) r.game.ne_set = find_ne_by_grid(r.game);
    }

    if (config.x0.size() != r.game.n) throw ConfigError("resolve: x0 length != strategy count");

    if (config.delay_matrix) {
        if (config.delay_matrix->rows() != r.game.n)
            throw ConfigError("resolve: delay matrix size != strategy count");
        r.delays = make_delay_matrix(*config.delay_matrix);
    } else {
        r.delays = make_abs_diff_delays(r.game.n);
    }

    double rho;
    if (config.rho) {
        rho = *config.rho;
    } else {
        const RhoCalibration cal = max_valid_rho(r.game, kRhoAutoGrid);
        rho = cal.any_rho_valid ? 1.0 : cal.rho * kRhoSafety;
        r.config.rho = rho;
    }
    r.params = ProtocolParams{rho, r.game.n};

    r.h = config.h ? *config.h : Simulator::default_step(r.delays);
    r.config.h = r.h;
    r.stride = config.stride > 0 ? config.stride : Simulator::default_output_stride(r.h);
    r.scheme = config.scheme == "heun" ? Scheme::kHeun : Scheme::kEuler;
    r.consts = compute_constants(r.game, r.params, r.delays, config.delta);
    return r;
}

}  // namespace popdyn
