#include "sqa/output.hpp"

#include <fmt/format.h>

#include "sqa/error.hpp"

namespace sqa {

OutputSet::~OutputSet() {
    if (committed_) {
        return;
    }
    streams_.clear();
    std::error_code ignored;
    for (const auto& t : temps_) {
        std::filesystem::remove(t, ignored);
    }
}

std::ostream& OutputSet::open(const std::filesystem::path& path) {
    auto temp = path;
    temp += ".partial";
    auto stream = std::make_unique<std::ofstream>(temp, std::ios::binary | std::ios::trunc);
    if (!*stream) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
    finals_.push_back(path);
    temps_.push_back(temp);
    streams_.push_back(std::move(stream));
    return *streams_.back();
}

void OutputSet::commit() {
    for (std::size_t i = 0; i < streams_.size(); ++i) {
        streams_[i]->flush();
        if (!*streams_[i]) {
            throw Error(fmt::format("failed writing '{}'", finals_[i].string()));
        }
        streams_[i]->close();
    }
    for (std::size_t i = 0; i < temps_.size(); ++i) {
        std::error_code ec;
        std::filesystem::rename(temps_[i], finals_[i], ec);
        if (ec) {
            throw Error(fmt::format("cannot move output into '{}': {}", finals_[i].string(), ec.message()));
        }
    }
    committed_ = true;
}

} // namespace sqa
