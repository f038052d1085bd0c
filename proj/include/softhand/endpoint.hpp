#pragma once

#include <cstdint>
#include <string>

namespace softhand {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    std::string str() const { return host + ":" + std::to_string(port); }
    bool operator==(const Endpoint&) const = default;
};

}  // namespace softhand
