#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace testsupport {

// Scratch file that cleans up after itself.
class TempFile {
public:
    explicit TempFile(const std::string& name, const std::string& content = "") {
        path_ = (std::filesystem::temp_directory_path() /
                 ("swarmtab_test_" + std::to_string(counter()++) + "_" + name))
                    .string();
        if (!content.empty()) {
            std::ofstream out(path_, std::ios::binary);
            out << content;
        }
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string path_;
};

class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("swarmtab_test_" + std::to_string(counter()++) + "_" + name))
                    .string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace testsupport
