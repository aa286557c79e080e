#include "uabs/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace uabs {

std::vector<KvEntry> parse_kv(std::istream& in) {
    std::vector<KvEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(lineno, "expected `key = value`");
        }
        KvEntry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        if (entry.key.empty()) throw ParseError(lineno, "empty key");
        for (const KvEntry& prev : entries) {
            if (prev.key == entry.key) {
                throw ParseError(lineno, "duplicate key `" + entry.key + "`");
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<KvEntry> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_kv(in);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::conventional: return "conventional";
        case Method::transfer: return "transfer";
        case Method::comps: return "comps";
    }
    throw std::invalid_argument("method_name: invalid method");
}

Method method_from_name(const std::string& name) {
    if (name == "conventional") return Method::conventional;
    if (name == "transfer") return Method::transfer;
    if (name == "comps") return Method::comps;
    throw std::invalid_argument("unknown method `" + name + "`");
}

void RunConfig::validate() const {
    if (tasks < 1) throw std::invalid_argument("config: k must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
    if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (encoder.knn < 1) throw std::invalid_argument("config: knn must be >= 1");
    if (!(t_step_s > 0.0)) throw std::invalid_argument("config: t_step must be positive");
    if (!(uabs_speed_mps > 0.0) || !(gue_speed_mps > 0.0)) {
        throw std::invalid_argument("config: v_u and v_g must be positive");
    }
    if (p_msg < 0.0 || p_msg > 1.0) throw std::invalid_argument("config: p_msg must be in [0, 1]");
    if (g_min < 1 || g_max < g_min) throw std::invalid_argument("config: need 1 <= g_min <= g_max");
    if (speed_jitter < 0.0 || speed_jitter >= 1.0) {
        throw std::invalid_argument("config: speed_jitter must be in [0, 1)");
    }
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    area().validate();
    rl.validate();
    meta.validate();
    channel.validate();
    reward.validate();
    arch().validate();
}

RunConfig toy_config() {
    RunConfig cfg;
    cfg.scenario = Scenario::toy;
    cfg.area_width = 40.0;
    cfg.area_height = 40.0;
    cfg.altitude = kToyAltitudeM;
    cfg.horizon = 60;
    cfg.uabs_speed_mps = 1.0;
    cfg.gue_speed_mps = 1.0;
    cfg.channel.ptx_dbm = 0.0;
    cfg.channel.snr_th_db = 13.5;  // ~15 m LoS slant-coverage radius at 10 m altitude
    return cfg;
}

RunConfig urban_config() {
    RunConfig cfg;
    cfg.scenario = Scenario::urban;
    cfg.area_width = 1500.0;
    cfg.area_height = 900.0;
    cfg.altitude = 100.0;
    cfg.horizon = 300;
    cfg.uabs_speed_mps = 20.0;
    cfg.gue_speed_mps = 10.0;
    cfg.channel.ptx_dbm = 20.0;
    cfg.channel.snr_th_db = -10.0;
    return cfg;
}

namespace {

double parse_double(const KvEntry& e) {
    if (e.value == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ParseError(e.line, "invalid number `" + e.value + "` for key `" + e.key + "`");
    }
}

int parse_int(const KvEntry& e) {
    int v = 0;
    const auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc{} || p != e.value.data() + e.value.size()) {
        throw ParseError(e.line, "invalid integer `" + e.value + "` for key `" + e.key + "`");
    }
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? std::string{} : item.substr(b, e - b + 1));
    }
    return parts;
}

std::string format_double(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& v, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

void apply_config(RunConfig& cfg, const std::vector<KvEntry>& entries) {
    for (const KvEntry& e : entries) {
        if (e.key == "k") cfg.tasks = parse_int(e);
        else if (e.key == "n") cfg.rl.episodes = parse_int(e);
        else if (e.key == "eta") cfg.rl.eta = cfg.meta.eta = parse_double(e);
        else if (e.key == "kappa") cfg.meta.kappa = parse_double(e);
        else if (e.key == "gamma") cfg.rl.gamma = cfg.meta.gamma = parse_double(e);
        else if (e.key == "b") cfg.meta.b = parse_int(e);
        else if (e.key == "i_meta") cfg.meta.i_meta = parse_int(e);
        else if (e.key == "ratio_clip") cfg.meta.ratio_clip = parse_double(e);
        else if (e.key == "meta_grad_mode") {
            if (e.value == "first_order") cfg.meta.meta_grad_mode = MetaGradMode::first_order;
            else if (e.value == "finite_difference") cfg.meta.meta_grad_mode = MetaGradMode::finite_difference;
            else throw ParseError(e.line, "meta_grad_mode must be first_order or finite_difference");
        }
        else if (e.key == "c_max") cfg.reward.c_max = parse_int(e);
        else if (e.key == "t_step") cfg.t_step_s = parse_double(e);
        else if (e.key == "v_u") cfg.uabs_speed_mps = parse_double(e);
        else if (e.key == "v_g") cfg.gue_speed_mps = parse_double(e);
        else if (e.key == "p_msg") cfg.p_msg = parse_double(e);
        else if (e.key == "ptx_dbm") cfg.channel.ptx_dbm = parse_double(e);
        else if (e.key == "pnoise_dbm") cfg.channel.pnoise_dbm = parse_double(e);
        else if (e.key == "gtx_db") cfg.channel.gtx_db = parse_double(e);
        else if (e.key == "grx_db") cfg.channel.grx_db = parse_double(e);
        else if (e.key == "snr_th_db") cfg.channel.snr_th_db = parse_double(e);
        else if (e.key == "fc_ghz") cfg.channel.fc_mhz = parse_double(e) * 1000.0;
        else if (e.key == "alpha") cfg.channel.alpha = parse_double(e);
        else if (e.key == "beta") cfg.channel.beta = parse_double(e);
        else if (e.key == "eta_los_db") cfg.channel.eta_los_db = parse_double(e);
        else if (e.key == "eta_nlos_db") cfg.channel.eta_nlos_db = parse_double(e);
        else if (e.key == "link_mode") {
            if (e.value == "sampled") cfg.channel.link_mode = LinkMode::sampled;
            else if (e.value == "expected") cfg.channel.link_mode = LinkMode::expected;
            else throw ParseError(e.line, "link_mode must be sampled or expected");
        }
        else if (e.key == "altitude") cfg.altitude = parse_double(e);
        else if (e.key == "knn") cfg.encoder.knn = parse_int(e);
        else if (e.key == "hidden") {
            cfg.hidden.clear();
            for (const std::string& part : split_list(e.value)) {
                cfg.hidden.push_back(parse_int({e.key, part, e.line}));
            }
        }
        else if (e.key == "area_width") cfg.area_width = parse_double(e);
        else if (e.key == "area_height") cfg.area_height = parse_double(e);
        else if (e.key == "horizon") cfg.horizon = parse_int(e);
        else if (e.key == "seeds") {
            cfg.seeds.clear();
            for (const std::string& part : split_list(e.value)) {
                try {
                    cfg.seeds.push_back(std::stoull(part));
                } catch (const std::exception&) {
                    throw ParseError(e.line, "invalid seed `" + part + "`");
                }
            }
        }
        else if (e.key == "methods") {
            cfg.methods.clear();
            for (const std::string& part : split_list(e.value)) {
                try {
                    cfg.methods.push_back(method_from_name(part));
                } catch (const std::invalid_argument& ex) {
                    throw ParseError(e.line, ex.what());
                }
            }
        }
        else if (e.key == "g_min") cfg.g_min = parse_int(e);
        else if (e.key == "g_max") cfg.g_max = parse_int(e);
        else if (e.key == "speed_jitter") cfg.speed_jitter = parse_double(e);
        else if (e.key == "threads") cfg.threads = parse_int(e);
        else throw ParseError(e.line, "unknown key `" + e.key + "`");
    }
    cfg.validate();
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    apply_config(cfg, parse_kv_file(path));
}

std::string canonical_config(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["scenario"] = cfg.scenario == Scenario::toy ? "toy" : "urban";
    kv["k"] = std::to_string(cfg.tasks);
    kv["n"] = std::to_string(cfg.rl.episodes);
    kv["eta"] = format_double(cfg.rl.eta);
    kv["kappa"] = format_double(cfg.meta.kappa);
    kv["gamma"] = format_double(cfg.rl.gamma);
    kv["b"] = std::to_string(cfg.meta.b);
    kv["i_meta"] = std::to_string(cfg.meta.i_meta);
    kv["ratio_clip"] = format_double(cfg.meta.ratio_clip);
    kv["meta_grad_mode"] = cfg.meta.meta_grad_mode == MetaGradMode::first_order
                               ? "first_order" : "finite_difference";
    kv["c_max"] = std::to_string(cfg.reward.c_max);
    kv["t_step"] = format_double(cfg.t_step_s);
    kv["v_u"] = format_double(cfg.uabs_speed_mps);
    kv["v_g"] = format_double(cfg.gue_speed_mps);
    kv["p_msg"] = format_double(cfg.p_msg);
    kv["ptx_dbm"] = format_double(cfg.channel.ptx_dbm);
    kv["pnoise_dbm"] = format_double(cfg.channel.pnoise_dbm);
    kv["gtx_db"] = format_double(cfg.channel.gtx_db);
    kv["grx_db"] = format_double(cfg.channel.grx_db);
    kv["snr_th_db"] = format_double(cfg.channel.snr_th_db);
    kv["fc_ghz"] = format_double(cfg.channel.fc_mhz / 1000.0);
    kv["alpha"] = format_double(cfg.channel.alpha);
    kv["beta"] = format_double(cfg.channel.beta);
    kv["eta_los_db"] = format_double(cfg.channel.eta_los_db);
    kv["eta_nlos_db"] = format_double(cfg.channel.eta_nlos_db);
    kv["link_mode"] = cfg.channel.link_mode == LinkMode::sampled ? "sampled" : "expected";
    kv["altitude"] = format_double(cfg.altitude);
    kv["knn"] = std::to_string(cfg.encoder.knn);
    kv["hidden"] = join(cfg.hidden, [](int v) { return std::to_string(v); });
    kv["area_width"] = format_double(cfg.area_width);
    kv["area_height"] = format_double(cfg.area_height);
    kv["horizon"] = std::to_string(cfg.horizon);
    kv["seeds"] = join(cfg.seeds, [](std::uint64_t v) { return std::to_string(v); });
    kv["methods"] = join(cfg.methods, method_name);
    kv["g_min"] = std::to_string(cfg.g_min);
    kv["g_max"] = std::to_string(cfg.g_max);
    kv["speed_jitter"] = format_double(cfg.speed_jitter);

    std::string out;
    for (const auto& [key, value] : kv) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = canonical_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace uabs
