#include "softhand/net/tcp_stream.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "softhand/error.hpp"

namespace softhand::net {

namespace {

std::string errno_text(int err) { return std::strerror(err); }

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

}  // namespace

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    const std::string where = host + ":" + std::to_string(port);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (int rc = getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result); rc != 0)
        throw TransportError("cannot resolve " + where + ": " + gai_strerror(rc));

    std::string last_error = "no address";
    for (addrinfo* ai = result; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        const int flags = fcntl(fd, F_GETFL, 0);
        fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
            if (rc == 0) {
                last_error = "connect timed out";
                ::close(fd);
                continue;
            }
            int err = 0;
            socklen_t len = sizeof err;
            getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
            rc = err == 0 ? 0 : -1;
            errno = err;
        }
        if (rc != 0) {
            last_error = errno_text(errno);
            ::close(fd);
            continue;
        }
        fcntl(fd, F_SETFL, flags);
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        set_timeouts(fd, timeout);
        freeaddrinfo(result);
        return TcpStream(fd);
    }
    freeaddrinfo(result);
    throw TransportError("cannot connect to " + where + ": " + last_error);
}

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_), pending_(std::move(other.pending_)) {
    other.fd_ = -1;
}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        pending_ = std::move(other.pending_);
        other.fd_ = -1;
    }
    return *this;
}

TcpStream::~TcpStream() { close(); }

void TcpStream::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    pending_.clear();
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
    if (fd_ < 0) throw TransportError("socket is closed");
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("send failed: " + errno_text(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

void TcpStream::write_all(std::string_view text) {
    write_all(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void TcpStream::read_exact(std::span<std::uint8_t> out) {
    if (fd_ < 0) throw TransportError("socket is closed");
    std::size_t got = 0;
    const std::size_t buffered = std::min(pending_.size(), out.size());
    std::memcpy(out.data(), pending_.data(), buffered);
    pending_.erase(0, buffered);
    got = buffered;
    while (got < out.size()) {
        const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
        if (n == 0) throw TransportError("connection closed by peer");
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("read timed out");
            throw TransportError("recv failed: " + errno_text(errno));
        }
        got += static_cast<std::size_t>(n);
    }
}

std::string TcpStream::read_line(std::size_t max_length) {
    if (fd_ < 0) throw TransportError("socket is closed");
    while (true) {
        if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (pending_.size() > max_length) throw TransportError("line exceeds maximum length");
        char buf[4096];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0) throw TransportError("connection closed by peer");
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("read timed out");
            throw TransportError("recv failed: " + errno_text(errno));
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
}

}  // namespace softhand::net
