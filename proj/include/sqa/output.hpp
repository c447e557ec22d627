#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

namespace sqa {

// A set of output files that appear together or not at all. Each file is
// written to a temporary sibling and renamed into place by commit(); if the
// set is destroyed uncommitted the temporaries are removed.
class OutputSet {
public:
    OutputSet() = default;
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet();

    // Throws Error if the temporary cannot be created.
    std::ostream& open(const std::filesystem::path& path);
    void commit();

    const std::vector<std::filesystem::path>& paths() const { return finals_; }

private:
    std::vector<std::filesystem::path> finals_;
    std::vector<std::filesystem::path> temps_;
    std::vector<std::unique_ptr<std::ofstream>> streams_;
    bool committed_ = false;
};

} // namespace sqa
