#pragma once

#include <string>

#include "finsler/geometry.hpp"

namespace finsler {

// Scene description shared by the CLI commands. Populated from a JSON config
// document; command-line flags override individual fields.
struct SceneConfig {
    std::string table{"circle:1"};
    std::string metric{"euclid"};
    Point2 source{0.3, 0.0};
    int bounces{1};
    int samples{2048};
    double larmor{4.0};         // magnetic command only
    std::string out_dir{"out"};
    std::string prefix;         // defaults to the command name
    unsigned workers{0};        // 0 = hardware default; outputs unaffected
    int probe_grid{20};
    std::string figure_tag;     // defaults to a scene slug
    double tolerance_scale{1.0};  // verify command only
};

// Parses the JSON document at `path`. Unknown keys are rejected.
SceneConfig load_scene_config(const std::string& path);

// "x,y" -> Point2; throws ConfigError on malformed input.
Point2 parse_point(const std::string& text);

// Scene slug like "caustic-circle_1-euclid-n2" used as the default figure tag.
std::string scene_slug(const std::string& command, const SceneConfig& config);

}  // namespace finsler
