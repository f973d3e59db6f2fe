#pragma once

#include "powertherm/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace testutil {

inline std::filesystem::path fixture_dir()
{
#ifdef POWERTHERM_FIXTURE_DIR
    return POWERTHERM_FIXTURE_DIR;
#else
    return "tests/fixtures";
#endif
}

inline std::filesystem::path golden_dir()
{
#ifdef POWERTHERM_GOLDEN_DIR
    return POWERTHERM_GOLDEN_DIR;
#else
    return "tests/golden";
#endif
}

// The CLI binary sits next to the test binary in the build directory.
inline std::filesystem::path cli_path()
{
    const auto self = std::filesystem::read_symlink("/proc/self/exe");
    const auto cli = self.parent_path() / "powertherm";
    if (!std::filesystem::exists(cli)) {
        throw powertherm::IoError("CLI binary not found at " + cli.string());
    }
    return cli;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "powertherm-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) {
            throw powertherm::IoError("mkdtemp failed");
        }
        path_ = tmpl;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw powertherm::IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI with the given argument string, capturing stdout/stderr.
inline CliResult run_cli(const std::string& args, const TempDir& scratch)
{
    const auto out_path = scratch.file("cli_stdout.txt");
    const auto err_path = scratch.file("cli_stderr.txt");
    const std::string cmd = cli_path().string() + " " + args + " > " + out_path.string() +
                            " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

} // namespace testutil
