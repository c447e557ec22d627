#include <httplib.h>
#include <json.hpp>

#include <fmt/format.h>

#include "sqa/augment.hpp"
#include "sqa/error.hpp"

namespace sqa {

HttpTranslationClient::HttpTranslationClient(std::string url, int timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
        throw Error(fmt::format("translation url '{}' must start with http://", url));
    }
    if (path_start == std::string::npos) {
        base_ = url;
        path_ = "/translate";
    } else {
        base_ = url.substr(0, path_start);
        path_ = url.substr(path_start);
    }
}

std::vector<std::string> HttpTranslationClient::translate(const std::vector<std::string>& texts,
                                                          std::string_view source_language,
                                                          std::string_view target_language) {
    if (texts.empty()) {
        return {};
    }
    httplib::Client client(base_);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);

    nlohmann::json body;
    body["texts"] = texts;
    body["source"] = source_language;
    body["target"] = target_language;
    const auto response = client.Post(path_, body.dump(), "application/json");
    if (!response) {
        throw Error(fmt::format("translation request to {}{} failed: {}", base_, path_,
                                httplib::to_string(response.error())));
    }
    if (response->status != 200) {
        throw Error(fmt::format("translation server returned HTTP {}: {}", response->status,
                                response->body));
    }
    std::vector<std::string> out;
    try {
        out = nlohmann::json::parse(response->body).at("texts").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("malformed translation response: {}", e.what()));
    }
    if (out.size() != texts.size()) {
        throw Error(fmt::format("translation server returned {} texts for {} inputs", out.size(),
                                texts.size()));
    }
    return out;
}

} // namespace sqa
