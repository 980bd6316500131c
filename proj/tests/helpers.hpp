// Copyright (C) 2026 the wamm project authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WAMM_TESTS_HELPERS_HPP
#define WAMM_TESTS_HELPERS_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "wamm/corpus.hpp"
#include "wamm/error.hpp"

namespace wamm_test {

inline std::string data_dir() { return WAMM_DATA_DIR; }

inline std::string data_file(const std::string& name) { return data_dir() + "/" + name; }

/// Runs fn, returns the wamm error code it throws ("" when it does not).
template <typename Fn>
std::string error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const wamm::Error& e) {
        return e.code();
    }
    return {};
}

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("wamm_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline wamm::Dataset make_dataset(std::initializer_list<std::pair<const char*, wamm::AttackClass>> rows) {
    wamm::Dataset ds;
    uint64_t id = 0;
    for (const auto& [text, cls] : rows) ds.records.push_back({text, cls, id++, {}});
    return ds;
}

} // namespace wamm_test

#endif // WAMM_TESTS_HELPERS_HPP
