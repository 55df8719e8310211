#pragma once

#include <string>

namespace modcheck {

struct SourceLoc {
    std::string file;
    int line = 1;
    int column = 1;

    bool operator==(const SourceLoc&) const = default;
};

inline std::string to_string(const SourceLoc& loc) {
    return loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

} // namespace modcheck
