#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "modcheck/frontend.hpp"

namespace testutil {

inline std::string fixture(const std::string& rel) {
    return std::string(FIXTURE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Scratch directory holding one synthetic module; removed on destruction.
class TempModule {
public:
    explicit TempModule(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("modcheck_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(dir_);
    }
    ~TempModule() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }

    std::string write(const std::string& name, const std::string& content) {
        std::string path = (dir_ / name).string();
        std::ofstream out(path);
        out << content;
        return path;
    }

    std::string dir() const { return dir_.string(); }

    modcheck::cfront::CModule parse(const std::string& h_name, const std::string& c_name,
                                    modcheck::cfront::PreprocConfig cfg = {}) {
        cfg.include_dirs.push_back(dir());
        return modcheck::cfront::parse_module((dir_ / h_name).string(),
                                              (dir_ / c_name).string(), cfg);
    }

    // convenience: write both files then parse
    modcheck::cfront::CModule make(const std::string& h_src, const std::string& c_src,
                                   modcheck::cfront::PreprocConfig cfg = {}) {
        write("m.h", h_src);
        write("m.c", c_src);
        return parse("m.h", "m.c", std::move(cfg));
    }

private:
    std::filesystem::path dir_;
    static inline int counter_ = 0;
};

} // namespace testutil
