#pragma once

// Modbus/TCP framing and the register-level request handler. Big-endian
// 16-bit fields throughout. Only function codes 0x03, 0x04, 0x06 and 0x10.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace softhand::modbus {

enum class Function : std::uint8_t {
    read_holding = 0x03,
    read_input = 0x04,
    write_single = 0x06,
    write_multiple = 0x10,
};

enum class Exception : std::uint8_t {
    illegal_function = 0x01,
    illegal_address = 0x02,
    illegal_value = 0x03,
};

inline constexpr std::size_t kMbapSize = 7;
inline constexpr std::size_t kMaxPduSize = 253;
inline constexpr std::uint16_t kMaxReadQuantity = 125;
inline constexpr std::uint16_t kMaxWriteQuantity = 123;

struct MbapHeader {
    std::uint16_t transaction = 0;
    std::uint16_t protocol = 0;
    std::uint16_t length = 0;  // unit id + PDU bytes
    std::uint8_t unit = 0;
};

class RegisterAccess {
  public:
    virtual ~RegisterAccess() = default;
    virtual std::size_t holding_count() const = 0;
    virtual std::size_t input_count() const = 0;
    virtual std::uint16_t read_holding(std::size_t address) const = 0;
    // Implementations may clamp; the response echoes the request.
    virtual void write_holding(std::size_t address, std::uint16_t value) = 0;
    virtual std::uint16_t read_input(std::size_t address) const = 0;
};

std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t offset);
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t value);

MbapHeader decode_mbap(std::span<const std::uint8_t, kMbapSize> bytes);
std::vector<std::uint8_t> encode_adu(const MbapHeader& header, std::span<const std::uint8_t> pdu);

// Executes one request PDU against `regs` and returns the response PDU
// (normal or exception). Never throws for malformed input.
std::vector<std::uint8_t> handle_request(std::span<const std::uint8_t> pdu, RegisterAccess& regs);

std::vector<std::uint8_t> exception_pdu(std::uint8_t function, Exception code);

// Request PDUs for the client side.
std::vector<std::uint8_t> read_request(Function fn, std::uint16_t start, std::uint16_t quantity);
std::vector<std::uint8_t> write_single_request(std::uint16_t address, std::uint16_t value);
std::vector<std::uint8_t> write_multiple_request(std::uint16_t start, std::span<const std::uint16_t> values);

// Response decoding. Throws ProtocolError carrying the exception code for an
// exception response, or code 0 when the response does not match the request.
std::vector<std::uint16_t> decode_read_response(Function fn, std::uint16_t quantity,
                                                std::span<const std::uint8_t> pdu);
void decode_write_response(std::span<const std::uint8_t> request, std::span<const std::uint8_t> pdu);

}  // namespace softhand::modbus
