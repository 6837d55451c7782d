#include "popdyn/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace popdyn {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string trajectory_csv(const std::vector<TrajectorySample>& trace, int n) {
    std::ostringstream out;
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    for (int i = 1; i <= n; ++i) out << ",y" << i;
    out << ",lambda,s_bar,ne_dist,transit_mass\n";
    for (const TrajectorySample& s : trace) {
        out << fmt(s.t);
        for (int i = 0; i < n; ++i) out << ',' << fmt(s.x(i));
        const Vec ycols = s.y.colwise().sum();
        for (int i = 0; i < n; ++i) out << ',' << fmt(ycols(i));
        out << ',' << fmt(s.lambda) << ',' << fmt(s.s_bar) << ',' << fmt(s.ne_dist) << ','
            << fmt(s.transit_mass) << '\n';
    }
    return out.str();
}

std::string update_log_csv(const std::vector<UpdateRecord>& log) {
    std::ostringstream out;
    out << "k,t_k,lambda_k,dot_val,f_val,floored\n";
    for (const UpdateRecord& u : log) {
        out << u.k << ',' << fmt(u.t) << ',' << fmt(u.lambda) << ',' << fmt(u.dot_val) << ','
            << fmt(u.f_val) << ',' << (u.floored ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string constants_block(const CertifiedConstants& consts) {
    std::ostringstream out;
    out << "N      " << fmt(consts.N) << '\n';
    out << "M      " << fmt(consts.M) << '\n';
    out << "K      " << fmt(consts.K) << '\n';
    out << "L      " << fmt(consts.L) << '\n';
    out << "B_DF   " << fmt(consts.b_df) << '\n';
    out << "rho    " << fmt(consts.rho) << '\n';
    out << "d_max  " << fmt(consts.d_max) << '\n';
    return out.str();
}

std::string report_json(const RunReport& r) {
    nlohmann::json j;
    j["final_ne_dist"] = r.final_ne_dist;
    j["final_transit_mass"] = r.final_transit_mass;
    j["osc_amplitude"] = r.osc_amplitude;
    j["mean_transit_mass_tail"] = r.mean_transit_mass_tail;
    j["update_count"] = r.update_count;
    j["converged"] = r.converged;
    j["clipped_mass"] = r.clipped_mass;
    j["max_mass_error"] = r.max_mass_error;
    j["tuner_terminated"] = r.tuner_terminated;
    j["bound_violations"] = {{"x_rate", r.bound_violations.x_rate},
                             {"y_rate", r.bound_violations.y_rate},
                             {"envelope", r.bound_violations.envelope},
                             {"passivity", r.bound_violations.passivity},
                             {"delta_passivity", r.bound_violations.delta_passivity}};
    return j.dump(2) + "\n";
}

std::string meta_json(const ExperimentConfig& resolved_config, const CertifiedConstants& consts) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(config_to_json(resolved_config));
    nlohmann::json c;
    c["N"] = consts.N;
    c["M"] = consts.M;
    c["K"] = consts.K;
    c["L"] = consts.L;
    c["B_DF"] = consts.b_df;
    c["rho"] = consts.rho;
    c["d_max"] = consts.d_max;
    nlohmann::json di = nlohmann::json::array();
    for (Eigen::Index i = 0; i < consts.d_i.size(); ++i) di.push_back(consts.d_i(i));
    c["d_i"] = di;
    c["delta"] = consts.delta;
    j["constants"] = c;
    return j.dump(2) + "\n";
}

}  // namespace popdyn
