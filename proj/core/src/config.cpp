#include "finsler/config.hpp"

#include <fstream>
#include <set>

#include "finsler/errors.hpp"
#include "json.hpp"

namespace finsler {

SceneConfig load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad JSON in '" + path + "': " + e.what());
    }
    static const std::set<std::string> known = {
        "table",  "metric",  "source",     "bounces",    "samples",
        "larmor", "out_dir", "prefix",     "workers",    "probe_grid",
        "figure", "tolerance_scale"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "'");

    SceneConfig c;
    try {
        if (j.contains("table")) c.table = j["table"].get<std::string>();
        if (j.contains("metric")) c.metric = j["metric"].get<std::string>();
        if (j.contains("source")) {
            auto s = j["source"];
            if (!s.is_array() || s.size() != 2)
                throw ConfigError("source must be [x, y]");
            c.source = {s[0].get<double>(), s[1].get<double>()};
        }
        if (j.contains("bounces")) c.bounces = j["bounces"].get<int>();
        if (j.contains("samples")) c.samples = j["samples"].get<int>();
        if (j.contains("larmor")) c.larmor = j["larmor"].get<double>();
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("prefix")) c.prefix = j["prefix"].get<std::string>();
        if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
        if (j.contains("probe_grid")) c.probe_grid = j["probe_grid"].get<int>();
        if (j.contains("figure")) c.figure_tag = j["figure"].get<std::string>();
        if (j.contains("tolerance_scale"))
            c.tolerance_scale = j["tolerance_scale"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

Point2 parse_point(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw ConfigError("point must be 'x,y', got '" + text + "'");
    try {
        std::size_t p1 = 0, p2 = 0;
        std::string xs = text.substr(0, comma), ys = text.substr(comma + 1);
        double x = std::stod(xs, &p1);
        double y = std::stod(ys, &p2);
        if (p1 != xs.size() || p2 != ys.size())
            throw std::invalid_argument(text);
        return {x, y};
    } catch (const std::exception&) {
        throw ConfigError("point must be 'x,y', got '" + text + "'");
    }
}

std::string scene_slug(const std::string& command, const SceneConfig& config) {
    auto sanitize = [](std::string s) {
        for (char& c : s)
            if (c == ':' || c == ',' || c == '.') c = '_';
        return s;
    };
    return command + "-" + sanitize(config.table) + "-" +
           sanitize(config.metric) + "-n" + std::to_string(config.bounces);
}

}  // namespace finsler
