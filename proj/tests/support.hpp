#pragma once

#include <filesystem>
#include <string>

#include "gggp/grammar.hpp"

namespace test_support {

inline auto source_path(std::string const& rel) -> std::string
{
    return (std::filesystem::path(GGGP_SOURCE_DIR) / rel).string();
}

inline auto base_grammar() -> gggp::Grammar { return gggp::load_grammar(source_path("grammars/base.bnf")); }
inline auto nobias_grammar() -> gggp::Grammar { return gggp::load_grammar(source_path("grammars/nobias.bnf")); }

/// Fresh empty directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string const& name)
        : path_(std::filesystem::temp_directory_path() / ("gggp_test_" + name))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(TempDir const&) = delete;
    auto operator=(TempDir const&) -> TempDir& = delete;

    [[nodiscard]] auto path() const -> std::filesystem::path const& { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace test_support
