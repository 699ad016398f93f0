#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "airs/multiuser.hpp"
#include "airs/rng.hpp"
#include "airs/single_user.hpp"
#include "airs/static_ao.hpp"
#include "airs/system.hpp"

namespace airs {

/// Experiment description. All physical quantities use field units
/// (dBm, dB, meters); conversion to linear milliwatt scale happens once,
/// in to_system_params.
struct ScenarioConfig {
    double p_u_dbm = 15.0;
    double p_b_dbm = 20.0;
    double p_f_dbm = -5.0;
    double sigma_f_dbm = -80.0;
    double sigma_0_dbm = -80.0;
    double beta_db = -30.0;
    int m = 4;
    int n_total = 100;
    int k_users = 1;
    double epsilon = 0.4;
    double d_m = 200.0;
    double h_m = 10.0;
    double user_circle_radius_m = 5.0;
    bool pirs_position_set = false;  // default tracks (0, 0, h_m)
    double pirs_x_m = 0.0, pirs_y_m = 0.0, pirs_z_m = 0.0;
    std::uint64_t seed = 1;
    int drops_per_point = 10;
    int parallel = 1;
    QcqpMethod qcqp_method = QcqpMethod::Sdr;
    std::string sweep_variable = "n_total";
    std::vector<double> sweep_grid;
    std::vector<std::string> schemes;
    std::string out_dir = ".";
    std::string output_stem = "sweep";

    void validate() const {
        if (sweep_variable != "n_total" && sweep_variable != "epsilon")
            throw InvalidInputError("config: sweep_variable must be n_total or epsilon");
        if (drops_per_point < 1) throw InvalidInputError("config: drops_per_point must be >= 1");
        if (parallel < 1) throw InvalidInputError("config: parallel must be >= 1");
        if (!sweep_grid.empty())
            for (std::size_t i = 1; i < sweep_grid.size(); ++i)
                if (!(sweep_grid[i] > sweep_grid[i - 1]))
                    throw InvalidInputError("config: sweep_grid must be strictly increasing");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

inline QcqpMethod parse_qcqp_method(const std::string& s) {
    if (s == "coordinate-ascent") return QcqpMethod::CoordinateAscent;
    if (s == "sdr") return QcqpMethod::Sdr;
    throw InvalidInputError("config: qcqp_method must be coordinate-ascent or sdr");
}

inline const char* to_string(QcqpMethod m) {
    return m == QcqpMethod::CoordinateAscent ? "coordinate-ascent" : "sdr";
}

/// Parses flat `key = value` text. Lines starting with # are comments.
/// Unknown keys are rejected so typos surface immediately.
inline ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig c;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("config line " + std::to_string(line_no) +
                                    ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));
        auto d = [&] { return std::stod(val); };
        auto i = [&] { return std::stoi(val); };
        if (key == "p_u_dbm") c.p_u_dbm = d();
        else if (key == "p_b_dbm") c.p_b_dbm = d();
        else if (key == "p_f_dbm") c.p_f_dbm = d();
        else if (key == "sigma_f_dbm") c.sigma_f_dbm = d();
        else if (key == "sigma_0_dbm") c.sigma_0_dbm = d();
        else if (key == "beta_db") c.beta_db = d();
        else if (key == "m") c.m = i();
        else if (key == "n_total") c.n_total = i();
        else if (key == "k_users") c.k_users = i();
        else if (key == "epsilon") c.epsilon = d();
        else if (key == "d_m") c.d_m = d();
        else if (key == "h_m") c.h_m = d();
        else if (key == "user_circle_radius_m") c.user_circle_radius_m = d();
        else if (key == "pirs_x_m") { c.pirs_x_m = d(); c.pirs_position_set = true; }
        else if (key == "pirs_y_m") { c.pirs_y_m = d(); c.pirs_position_set = true; }
        else if (key == "pirs_z_m") { c.pirs_z_m = d(); c.pirs_position_set = true; }
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(val));
        else if (key == "drops_per_point") c.drops_per_point = i();
        else if (key == "parallel") c.parallel = i();
        else if (key == "qcqp_method") c.qcqp_method = parse_qcqp_method(val);
        else if (key == "sweep_variable") c.sweep_variable = val;
        else if (key == "sweep_grid") {
            c.sweep_grid.clear();
            for (const auto& item : detail::split_list(val)) c.sweep_grid.push_back(std::stod(item));
        }
        else if (key == "schemes") c.schemes = detail::split_list(val);
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "output_stem") c.output_stem = val;
        else throw InvalidInputError("config line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
    }
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline SystemParams to_system_params(const ScenarioConfig& c) {
    SystemParams p;
    p.p_u_mw = dbm_to_mw(c.p_u_dbm);
    p.p_b_mw = dbm_to_mw(c.p_b_dbm);
    p.p_f_mw = dbm_to_mw(c.p_f_dbm);
    p.sigma_f_mw = dbm_to_mw(c.sigma_f_dbm);
    p.sigma_0_mw = dbm_to_mw(c.sigma_0_dbm);
    p.m = c.m;
    p.n_total = c.n_total;
    p.k_users = c.k_users;
    p.epsilon = c.epsilon;
    p.beta = db_to_linear(c.beta_db);
    p.geometry = Geometry::standard(c.d_m, c.h_m);
    if (c.pirs_position_set) p.geometry.pirs = {c.pirs_x_m, c.pirs_y_m, c.pirs_z_m};
    p.validate();
    return p;
}

/// Uniform placement over the user disk (area-uniform via square-root
/// radius sampling), centered on the nominal user location at ground
/// level.
inline std::vector<Vec3> place_users(RngStream& rng, const SystemParams& p, double radius_m) {
    if (radius_m < 0.0) throw InvalidInputError("place_users: radius must be >= 0");
    std::vector<Vec3> users;
    users.reserve(static_cast<std::size_t>(p.k_users));
    for (int k = 0; k < p.k_users; ++k) {
        double r = radius_m * std::sqrt(rng.uniform());
        double t = 2.0 * std::numbers::pi * rng.uniform();
        users.push_back({p.geometry.user_center.x + r * std::cos(t),
                         p.geometry.user_center.y + r * std::sin(t),
                         p.geometry.user_center.z});
    }
    return users;
}

/// One output row per (scheme, grid point). The wall-clock runtime is
/// reported in the JSON manifest, not the CSV, so reruns with the same
/// seed reproduce the CSV byte for byte.
struct ResultRecord {
    std::string scheme;
    double sweep_value = 0.0;
    std::uint64_t seed = 0;
    double wsr_bpshz = 0.0;
    double ul_rate = 0.0;
    double dl_rate = 0.0;
    int n_u = 0;
    int n_d = 0;
    int iterations = 0;
    double runtime_ms = 0.0;
    std::string error;
};

struct RateRegionRecord {
    std::string scheme;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double ul_weighted = 0.0;
    double dl_weighted = 0.0;
    double runtime_ms = 0.0;
    std::string error;
};

namespace detail {

/// Fixed 9-significant-digit rendering shared by every CSV column.
inline std::string fmt_float(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string render_csv(const std::vector<ResultRecord>& records) {
    std::string out = "scheme,sweep_value,seed,wsr_bpshz,ul_rate,dl_rate,n_u,n_d,iterations,error\n";
    for (const auto& r : records) {
        out += r.scheme;
        out += ',';
        out += fmt_float(r.sweep_value);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += fmt_float(r.wsr_bpshz);
        out += ',';
        out += fmt_float(r.ul_rate);
        out += ',';
        out += fmt_float(r.dl_rate);
        out += ',';
        out += std::to_string(r.n_u);
        out += ',';
        out += std::to_string(r.n_d);
        out += ',';
        out += std::to_string(r.iterations);
        out += ',';
        out += r.error;
        out += '\n';
    }
    return out;
}

inline std::string render_region_csv(const std::vector<RateRegionRecord>& records) {
    std::string out = "scheme,epsilon,seed,ul_weighted_bpshz,dl_weighted_bpshz,error\n";
    for (const auto& r : records) {
        out += r.scheme;
        out += ',';
        out += fmt_float(r.epsilon);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += fmt_float(r.ul_weighted);
        out += ',';
        out += fmt_float(r.dl_weighted);
        out += ',';
        out += r.error;
        out += '\n';
    }
    return out;
}

/// SHA-256 of a byte string, hex-encoded.
inline std::string sha256_hex(const std::string& data) {
    static constexpr std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::string msg = data;
    std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
    msg.push_back(static_cast<char>(0x80));
    while (msg.size() % 64 != 56) msg.push_back('\0');
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xff));

    auto rotr = [](std::uint32_t x, int c) { return (x >> c) | (x << (32 - c)); };
    for (std::size_t off = 0; off < msg.size(); off += 64) {
        std::uint32_t w[64];
        for (int t = 0; t < 16; ++t)
            w[t] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t])) << 24) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 1])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 2])) << 8) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 3]));
        for (int t = 16; t < 64; ++t) {
            std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                      hh = h[7];
        for (int t = 0; t < 64; ++t) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + s1 + ch + k[t] + w[t];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t mj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + mj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }
    char hex[65];
    for (int i = 0; i < 8; ++i) std::snprintf(hex + 8 * i, 9, "%08x", h[i]);
    return std::string(hex, 64);
}

/// Git-style blob hash of file content.
inline std::string content_hash(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;
    return sha256_hex(blob);
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::ordered_json config_echo(const ScenarioConfig& c) {
    nlohmann::ordered_json j;
    j["p_u_dbm"] = c.p_u_dbm;
    j["p_b_dbm"] = c.p_b_dbm;
    j["p_f_dbm"] = c.p_f_dbm;
    j["sigma_f_dbm"] = c.sigma_f_dbm;
    j["sigma_0_dbm"] = c.sigma_0_dbm;
    j["beta_db"] = c.beta_db;
    j["m"] = c.m;
    j["n_total"] = c.n_total;
    j["k_users"] = c.k_users;
    j["epsilon"] = c.epsilon;
    j["d_m"] = c.d_m;
    j["h_m"] = c.h_m;
    j["user_circle_radius_m"] = c.user_circle_radius_m;
    j["pirs_position_set"] = c.pirs_position_set;
    j["pirs_x_m"] = c.pirs_x_m;
    j["pirs_y_m"] = c.pirs_y_m;
    j["pirs_z_m"] = c.pirs_z_m;
    j["seed"] = c.seed;
    j["drops_per_point"] = c.drops_per_point;
    j["parallel"] = c.parallel;
    j["qcqp_method"] = to_string(c.qcqp_method);
    j["sweep_variable"] = c.sweep_variable;
    j["sweep_grid"] = c.sweep_grid;
    j["schemes"] = c.schemes;
    j["out_dir"] = c.out_dir;
    j["output_stem"] = c.output_stem;
    return j;
}

/// Run tasks 0..count-1 over a small worker pool; results land in
/// pre-sized slots so the output order never depends on scheduling.
template <typename Fn>
inline void parallel_for(int count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int n_threads = std::min(workers, count);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

struct DirectionRates {
    double ul_sum = 0.0;
    double dl_sum = 0.0;
};

/// Per-user closed-form rates for one surface of n elements at a fixed
/// position serving both directions, each user in its own slot.
inline DirectionRates single_airs_rates(const SystemParams& p, const Vec3& airs_pos, int n,
                                        const std::vector<Vec3>& users) {
    DirectionRates r;
    double g_bs = pathloss_gain(distance(p.geometry.bs, airs_pos), p.beta);
    double k = static_cast<double>(users.size());
    for (const auto& u : users) {
        double g_user = pathloss_gain(distance(u, airs_pos), p.beta);
        r.ul_sum += log2_1p(snr_uplink(p.p_u_mw, p.p_f_mw, p.m, n, g_bs, g_user, p.sigma_f_mw,
                                       p.sigma_0_mw)) / k;
        r.dl_sum += log2_1p(snr_downlink(p.p_b_mw, p.p_f_mw, p.m, n, g_bs, g_user,
                                         p.sigma_f_mw, p.sigma_0_mw)) / k;
    }
    return r;
}

inline DirectionRates pirs_rates(const SystemParams& p, int n, const std::vector<Vec3>& users) {
    DirectionRates r;
    double g_a = pathloss_gain(distance(p.geometry.bs, p.geometry.pirs), p.beta);
    double k = static_cast<double>(users.size());
    for (const auto& u : users) {
        double g_b = pathloss_gain(distance(u, p.geometry.pirs), p.beta);
        double nn = static_cast<double>(n) * static_cast<double>(n);
        r.ul_sum += log2_1p(p.p_u_mw * p.m * nn * g_a * g_b / p.sigma_0_mw) / k;
        r.dl_sum += log2_1p(p.p_b_mw * p.m * nn * g_a * g_b / p.sigma_0_mw) / k;
    }
    return r;
}

}  // namespace detail

struct RunOutput {
    std::vector<ResultRecord> records;
    std::string csv_path;
    std::string manifest_path;
    std::string csv_content;
    bool all_ok = true;
};

namespace detail {

/// Evaluates one scheme at one grid point for one user drop.
inline ResultRecord evaluate_point(const ScenarioConfig& cfg, const SystemParams& p,
                                   const std::string& scheme, int grid_index, int drop) {
    ResultRecord rec;
    rec.scheme = scheme;
    rec.seed = cfg.seed;

    std::vector<Vec3> users;
    if (p.k_users == 1) {
        users = {p.geometry.user_center};
    } else {
        RngStream placement(cfg.seed,
                            0x75D0 + static_cast<std::uint64_t>(grid_index) * 10007ULL +
                                static_cast<std::uint64_t>(drop));
        users = place_users(placement, p, cfg.user_circle_radius_m);
    }

    if (scheme == "distributed-opt") {
        if (p.k_users == 1) {
            AllocationResult a = allocate_elements_optimal(p);
            RateSplit r = wsr_distributed(p, a.n_u, a.n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_rate;
            rec.dl_rate = r.dl_rate;
            rec.n_u = a.n_u;
            rec.n_d = a.n_d;
        } else {
            UserLinkGains g = user_link_gains(p, users);
            AllocationResult a = allocate_elements_search(p, g);
            UserRates r = rates_user_adaptive(p, g, a.n_u, a.n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_sum;
            rec.dl_rate = r.dl_sum;
            rec.n_u = a.n_u;
            rec.n_d = a.n_d;
        }
    } else if (scheme == "distributed-fixed") {
        int n_d = p.n_total / 2;
        int n_u = p.n_total - n_d;
        if (p.k_users == 1) {
            RateSplit r = wsr_distributed(p, n_u, n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_rate;
            rec.dl_rate = r.dl_rate;
        } else {
            UserLinkGains g = user_link_gains(p, users);
            UserRates r = rates_user_adaptive(p, g, n_u, n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_sum;
            rec.dl_rate = r.dl_sum;
        }
        rec.n_u = n_u;
        rec.n_d = n_d;
    } else if (scheme == "bs-side" || scheme == "user-side") {
        const Vec3& pos =
            scheme == "bs-side" ? p.geometry.bs_airs : p.geometry.user_airs;
        detail::DirectionRates r = detail::single_airs_rates(p, pos, p.n_total, users);
        rec.ul_rate = r.ul_sum;
        rec.dl_rate = r.dl_sum;
        rec.wsr_bpshz = (1.0 - p.epsilon) * r.ul_sum + p.epsilon * r.dl_sum;
        rec.n_u = p.n_total;
        rec.n_d = p.n_total;
    } else if (scheme == "pirs") {
        detail::DirectionRates r = detail::pirs_rates(p, p.n_total, users);
        rec.ul_rate = r.ul_sum;
        rec.dl_rate = r.dl_sum;
        rec.wsr_bpshz = (1.0 - p.epsilon) * r.ul_sum + p.epsilon * r.dl_sum;
        rec.n_u = p.n_total;
        rec.n_d = p.n_total;
    } else if (scheme == "mu-adaptive") {
        UserLinkGains g = user_link_gains(p, users);
        AllocationResult a = allocate_elements_search(p, g);
        UserRates r = rates_user_adaptive(p, g, a.n_u, a.n_d);
        rec.wsr_bpshz = r.wsr;
        rec.ul_rate = r.ul_sum;
        rec.dl_rate = r.dl_sum;
        rec.n_u = a.n_u;
        rec.n_d = a.n_d;
    } else if (scheme == "alloc-es" || scheme == "alloc-opt" || scheme == "alloc-subopt") {
        // Allocation-curve rows: the split chosen by each method plus the
        // rate it achieves.
        AllocationResult a;
        if (p.k_users == 1) {
            if (scheme == "alloc-es") {
                double best = -1.0;
                for (int nd = 0; nd <= p.n_total; ++nd) {
                    double w = wsr_distributed(p, p.n_total - nd, nd).wsr;
                    if (w > best) {
                        best = w;
                        a.n_d = nd;
                    }
                }
                a.n_u = p.n_total - a.n_d;
                a.wsr_bpshz = best;
                a.x_d_continuous = a.n_d;
            } else if (scheme == "alloc-opt") {
                a = allocate_elements_optimal(p);
            } else {
                double x = p.epsilon <= 0.0 ? 0.0
                           : p.epsilon >= 1.0
                               ? static_cast<double>(p.n_total)
                               : allocate_elements_near_optimal(p.epsilon, p.n_total);
                a.x_d_continuous = x;
                a.n_d = std::clamp(static_cast<int>(std::floor(x + 0.5)), 0, p.n_total);
                a.n_u = p.n_total - a.n_d;
                a.wsr_bpshz = wsr_distributed(p, a.n_u, a.n_d).wsr;
            }
            RateSplit r = wsr_distributed(p, a.n_u, a.n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_rate;
            rec.dl_rate = r.dl_rate;
        } else {
            if (scheme == "alloc-opt")
                throw InvalidInputError("alloc-opt: closed-form split is single-user only");
            UserLinkGains g = user_link_gains(p, users);
            if (scheme == "alloc-es") {
                a = allocate_elements_search(p, g);
            } else {
                double x = allocate_elements_near_optimal(
                    std::clamp(p.epsilon, 1e-9, 1.0 - 1e-9), p.n_total);
                a.n_d = std::clamp(static_cast<int>(std::floor(x + 0.5)), 1, p.n_total - 1);
                a.n_u = p.n_total - a.n_d;
            }
            UserRates r = rates_user_adaptive(p, g, a.n_u, a.n_d);
            rec.wsr_bpshz = r.wsr;
            rec.ul_rate = r.ul_sum;
            rec.dl_rate = r.dl_sum;
        }
        rec.n_u = a.n_u;
        rec.n_d = a.n_d;
    } else if (scheme == "mu-static") {
        StaticChannels ch = build_static_channels(p, users);
        AoOptions opt;
        opt.method = cfg.qcqp_method;
        opt.seed = cfg.seed + static_cast<std::uint64_t>(grid_index) * 1000003ULL +
                   static_cast<std::uint64_t>(drop);
        AoResult ao = run_alternating_optimization(p, ch, opt);
        rec.wsr_bpshz = ao.wsr;
        rec.ul_rate = ao.rates.ul_sum;
        rec.dl_rate = ao.rates.dl_sum;
        rec.n_u = ch.n_side;
        rec.n_d = ch.n_side;
        rec.iterations = ao.outer_iterations;
    } else {
        throw InvalidInputError("unknown scheme: " + scheme);
    }
    return rec;
}

}  // namespace detail

/// Runs every (scheme, grid point) pair, averaging random-drop schemes
/// over drops_per_point independent user placements, and writes the CSV
/// plus a JSON manifest (config echo, content hash, per-record runtimes).
inline RunOutput run_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.sweep_grid.empty()) throw InvalidInputError("run_sweep: empty sweep_grid");
    if (cfg.schemes.empty()) throw InvalidInputError("run_sweep: empty scheme list");

    struct Task {
        std::string scheme;
        int grid_index;
    };
    std::vector<Task> tasks;
    std::vector<std::string> schemes = cfg.schemes;
    std::sort(schemes.begin(), schemes.end());
    for (const auto& s : schemes)
        for (std::size_t gi = 0; gi < cfg.sweep_grid.size(); ++gi)
            tasks.push_back({s, static_cast<int>(gi)});

    std::vector<ResultRecord> records(tasks.size());
    detail::parallel_for(static_cast<int>(tasks.size()), cfg.parallel, [&](int ti) {
        const Task& task = tasks[static_cast<std::size_t>(ti)];
        double value = cfg.sweep_grid[static_cast<std::size_t>(task.grid_index)];
        ResultRecord& rec = records[static_cast<std::size_t>(ti)];
        auto t0 = std::chrono::steady_clock::now();
        try {
            SystemParams p = to_system_params(cfg);
            if (cfg.sweep_variable == "n_total") {
                double rounded = std::round(value);
                if (std::abs(value - rounded) > 1e-9)
                    throw InvalidInputError("n_total grid values must be integers");
                p.n_total = static_cast<int>(rounded);
            } else {
                p.epsilon = value;
            }
            p.validate();

            // Random-drop schemes average over placements; closed-form
            // single-user rows are deterministic and use one evaluation.
            bool uses_drops = p.k_users > 1;
            int drops = uses_drops ? cfg.drops_per_point : 1;
            double wsr = 0.0, ul = 0.0, dl = 0.0, nu = 0.0, nd = 0.0, iters = 0.0;
            for (int drop = 0; drop < drops; ++drop) {
                ResultRecord one =
                    detail::evaluate_point(cfg, p, task.scheme, task.grid_index, drop);
                wsr += one.wsr_bpshz;
                ul += one.ul_rate;
                dl += one.dl_rate;
                nu += one.n_u;
                nd += one.n_d;
                iters += one.iterations;
            }
            double inv = 1.0 / static_cast<double>(drops);
            rec.scheme = task.scheme;
            rec.seed = cfg.seed;
            rec.wsr_bpshz = wsr * inv;
            rec.ul_rate = ul * inv;
            rec.dl_rate = dl * inv;
            rec.n_u = static_cast<int>(std::llround(nu * inv));
            rec.n_d = static_cast<int>(std::llround(nd * inv));
            rec.iterations = static_cast<int>(std::llround(iters * inv));
        } catch (const std::exception& e) {
            rec.scheme = task.scheme;
            rec.seed = cfg.seed;
            rec.error = e.what();
        }
        rec.sweep_value = value;
        rec.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    });

    RunOutput out;
    out.records = std::move(records);
    for (const auto& r : out.records)
        if (!r.error.empty()) out.all_ok = false;

    out.csv_content = detail::render_csv(out.records);
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::path csv = dir / (cfg.output_stem + ".csv");
    detail::write_file_atomic(csv, out.csv_content);
    out.csv_path = csv.string();

    nlohmann::ordered_json manifest;
    manifest["config"] = detail::config_echo(cfg);
    manifest["csv_file"] = csv.filename().string();
    manifest["content_hash"] = detail::content_hash(out.csv_content);
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        nlohmann::ordered_json r;
        r["index"] = i;
        r["scheme"] = out.records[i].scheme;
        r["sweep_value"] = out.records[i].sweep_value;
        r["runtime_ms"] = out.records[i].runtime_ms;
        r["error"] = out.records[i].error;
        recs.push_back(r);
    }
    manifest["records"] = recs;
    std::filesystem::path mf = dir / (cfg.output_stem + "_manifest.json");
    detail::write_file_atomic(mf, manifest.dump(2) + "\n");
    out.manifest_path = mf.string();
    return out;
}

struct RateRegionOutput {
    std::vector<RateRegionRecord> records;
    std::string csv_path;
    std::string manifest_path;
    std::string csv_content;
    bool all_ok = true;
};

/// Weighted-rate pairs over the downlink-weight grid for the four
/// shared-phase designs: the joint optimization, the per-user per-link
/// closed-form upper bound, and the two single-direction designs with
/// the other direction's blocks filled in closed form afterwards.
inline RateRegionOutput run_rate_region(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<double> grid = cfg.sweep_grid;
    if (grid.empty()) throw InvalidInputError("run_rate_region: empty epsilon grid");
    for (double e : grid)
        if (e < 0.0 || e > 1.0)
            throw InvalidInputError("run_rate_region: epsilon grid must lie in [0, 1]");
    std::vector<std::string> schemes = cfg.schemes;
    if (schemes.empty())
        schemes = {"rate-region-joint", "rate-region-individual", "rate-region-fixed-ul",
                   "rate-region-fixed-dl"};
    std::sort(schemes.begin(), schemes.end());

    SystemParams base = to_system_params(cfg);
    // One seeded placement shared by every scheme and grid point: the
    // region is traced over a fixed scenario.
    std::vector<Vec3> users;
    if (base.k_users == 1) {
        users = {base.geometry.user_center};
    } else {
        RngStream placement(cfg.seed, 0x5eed);
        users = place_users(placement, base, cfg.user_circle_radius_m);
    }

    struct Task {
        std::string scheme;
        int grid_index;
    };
    std::vector<Task> tasks;
    for (const auto& s : schemes)
        for (std::size_t gi = 0; gi < grid.size(); ++gi)
            tasks.push_back({s, static_cast<int>(gi)});

    std::vector<RateRegionRecord> records(tasks.size());
    detail::parallel_for(static_cast<int>(tasks.size()), cfg.parallel, [&](int ti) {
        const Task& task = tasks[static_cast<std::size_t>(ti)];
        RateRegionRecord& rec = records[static_cast<std::size_t>(ti)];
        rec.scheme = task.scheme;
        rec.seed = cfg.seed;
        rec.epsilon = grid[static_cast<std::size_t>(task.grid_index)];
        auto t0 = std::chrono::steady_clock::now();
        try {
            SystemParams p = base;
            p.epsilon = rec.epsilon;
            p.validate();
            double eps = p.epsilon;

            if (task.scheme == "rate-region-individual") {
                // Dedicated per-user, per-link configurations: closed-form
                // optimum with half the elements on each surface.
                if (p.n_total % 2 != 0)
                    throw InvalidInputError("rate region requires even n_total");
                UserLinkGains g = user_link_gains(p, users);
                UserRates r = rates_user_adaptive(p, g, p.n_total / 2, p.n_total / 2);
                rec.ul_weighted = (1.0 - eps) * r.ul_sum;
                rec.dl_weighted = eps * r.dl_sum;
            } else {
                StaticChannels ch = build_static_channels(p, users);
                AoOptions opt;
                opt.method = cfg.qcqp_method;
                opt.seed = cfg.seed + static_cast<std::uint64_t>(task.grid_index) * 1000003ULL;
                if (task.scheme == "rate-region-joint") {
                    opt.objective = RateObjective::WeightedSum;
                    AoResult ao = run_alternating_optimization(p, ch, opt);
                    rec.ul_weighted = (1.0 - eps) * ao.rates.ul_sum;
                    rec.dl_weighted = eps * ao.rates.dl_sum;
                } else if (task.scheme == "rate-region-fixed-ul") {
                    opt.objective = RateObjective::UplinkOnly;
                    AoResult ao = run_alternating_optimization(p, ch, opt);
                    apply_downlink_closed_forms(ao.state, ch, p);
                    StaticRates r = rates_static(ao.state, ch, p);
                    rec.ul_weighted = (1.0 - eps) * r.ul_sum;
                    rec.dl_weighted = eps * r.dl_sum;
                } else if (task.scheme == "rate-region-fixed-dl") {
                    opt.objective = RateObjective::DownlinkOnly;
                    AoResult ao = run_alternating_optimization(p, ch, opt);
                    apply_uplink_closed_forms(ao.state, ch, p);
                    StaticRates r = rates_static(ao.state, ch, p);
                    rec.ul_weighted = (1.0 - eps) * r.ul_sum;
                    rec.dl_weighted = eps * r.dl_sum;
                } else {
                    throw InvalidInputError("unknown rate-region scheme: " + task.scheme);
                }
            }
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    });

    RateRegionOutput out;
    out.records = std::move(records);
    for (const auto& r : out.records)
        if (!r.error.empty()) out.all_ok = false;

    out.csv_content = detail::render_region_csv(out.records);
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::path csv = dir / (cfg.output_stem + ".csv");
    detail::write_file_atomic(csv, out.csv_content);
    out.csv_path = csv.string();

    nlohmann::ordered_json manifest;
    manifest["config"] = detail::config_echo(cfg);
    manifest["csv_file"] = csv.filename().string();
    manifest["content_hash"] = detail::content_hash(out.csv_content);
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        nlohmann::ordered_json r;
        r["index"] = i;
        r["scheme"] = out.records[i].scheme;
        r["epsilon"] = out.records[i].epsilon;
        r["runtime_ms"] = out.records[i].runtime_ms;
        r["error"] = out.records[i].error;
        recs.push_back(r);
    }
    manifest["records"] = recs;
    std::filesystem::path mf = dir / (cfg.output_stem + "_manifest.json");
    detail::write_file_atomic(mf, manifest.dump(2) + "\n");
    out.manifest_path = mf.string();
    return out;
}

}  // namespace airs
