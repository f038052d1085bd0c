#pragma once

// Blocking TCP client socket with connect/read/write timeouts.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace softhand::net {

class TcpStream {
  public:
    TcpStream() = default;
    // Throws TransportError on resolution failure, refusal or timeout.
    static TcpStream connect(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    bool is_open() const { return fd_ >= 0; }
    void close();

    void write_all(std::span<const std::uint8_t> bytes);
    void write_all(std::string_view text);
    void read_exact(std::span<std::uint8_t> out);
    // Reads through the next '\n' and returns the line without it (or '\r\n').
    std::string read_line(std::size_t max_length = 64 * 1024);

  private:
    explicit TcpStream(int fd) : fd_(fd) {}
    int fd_ = -1;
    std::string pending_;
};

}  // namespace softhand::net
