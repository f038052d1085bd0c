#include "softhand/modbus.hpp"

#include <algorithm>
#include <string>

#include "softhand/error.hpp"

namespace softhand::modbus {

std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return static_cast<std::uint16_t>((bytes[offset] << 8) | bytes[offset + 1]);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t value) {
    out.push_back(static_cast<std::uint8_t>(value >> 8));
    out.push_back(static_cast<std::uint8_t>(value & 0xff));
}

MbapHeader decode_mbap(std::span<const std::uint8_t, kMbapSize> bytes) {
    return {get_u16(bytes, 0), get_u16(bytes, 2), get_u16(bytes, 4), bytes[6]};
}

std::vector<std::uint8_t> encode_adu(const MbapHeader& header, std::span<const std::uint8_t> pdu) {
    std::vector<std::uint8_t> out;
    out.reserve(kMbapSize + pdu.size());
    put_u16(out, header.transaction);
    put_u16(out, header.protocol);
    put_u16(out, static_cast<std::uint16_t>(pdu.size() + 1));
    out.push_back(header.unit);
    out.insert(out.end(), pdu.begin(), pdu.end());
    return out;
}

std::vector<std::uint8_t> exception_pdu(std::uint8_t function, Exception code) {
    return {static_cast<std::uint8_t>(function | 0x80), static_cast<std::uint8_t>(code)};
}

namespace {

bool range_ok(std::size_t start, std::size_t quantity, std::size_t count) {
    return start < count && start + quantity <= count;
}

std::vector<std::uint8_t> handle_read(std::uint8_t fn, std::span<const std::uint8_t> pdu, RegisterAccess& regs) {
    if (pdu.size() != 5) return exception_pdu(fn, Exception::illegal_value);
    const std::uint16_t start = get_u16(pdu, 1);
    const std::uint16_t quantity = get_u16(pdu, 3);
    if (quantity < 1 || quantity > kMaxReadQuantity) return exception_pdu(fn, Exception::illegal_value);
    const bool holding = fn == static_cast<std::uint8_t>(Function::read_holding);
    const std::size_t count = holding ? regs.holding_count() : regs.input_count();
    if (!range_ok(start, quantity, count)) return exception_pdu(fn, Exception::illegal_address);
    std::vector<std::uint8_t> out{fn, static_cast<std::uint8_t>(quantity * 2)};
    for (std::size_t a = start; a < std::size_t{start} + quantity; ++a)
        put_u16(out, holding ? regs.read_holding(a) : regs.read_input(a));
    return out;
}

std::vector<std::uint8_t> handle_write_single(std::span<const std::uint8_t> pdu, RegisterAccess& regs) {
    constexpr auto fn = static_cast<std::uint8_t>(Function::write_single);
    if (pdu.size() != 5) return exception_pdu(fn, Exception::illegal_value);
    const std::uint16_t address = get_u16(pdu, 1);
    if (address >= regs.holding_count()) return exception_pdu(fn, Exception::illegal_address);
    regs.write_holding(address, get_u16(pdu, 3));
    return {pdu.begin(), pdu.end()};
}

std::vector<std::uint8_t> handle_write_multiple(std::span<const std::uint8_t> pdu, RegisterAccess& regs) {
    constexpr auto fn = static_cast<std::uint8_t>(Function::write_multiple);
    if (pdu.size() < 6) return exception_pdu(fn, Exception::illegal_value);
    const std::uint16_t start = get_u16(pdu, 1);
    const std::uint16_t quantity = get_u16(pdu, 3);
    const std::uint8_t byte_count = pdu[5];
    if (quantity < 1 || quantity > kMaxWriteQuantity || byte_count != quantity * 2 ||
        pdu.size() != 6u + byte_count)
        return exception_pdu(fn, Exception::illegal_value);
    if (!range_ok(start, quantity, regs.holding_count())) return exception_pdu(fn, Exception::illegal_address);
    for (std::size_t i = 0; i < quantity; ++i) regs.write_holding(start + i, get_u16(pdu, 6 + 2 * i));
    return {pdu.begin(), pdu.begin() + 5};
}

}  // namespace

std::vector<std::uint8_t> handle_request(std::span<const std::uint8_t> pdu, RegisterAccess& regs) {
    if (pdu.empty()) return exception_pdu(0, Exception::illegal_function);
    const std::uint8_t fn = pdu[0];
    switch (static_cast<Function>(fn)) {
        case Function::read_holding:
        case Function::read_input:
            return handle_read(fn, pdu, regs);
        case Function::write_single:
            return handle_write_single(pdu, regs);
        case Function::write_multiple:
            return handle_write_multiple(pdu, regs);
    }
    return exception_pdu(fn, Exception::illegal_function);
}

std::vector<std::uint8_t> read_request(Function fn, std::uint16_t start, std::uint16_t quantity) {
    std::vector<std::uint8_t> out{static_cast<std::uint8_t>(fn)};
    put_u16(out, start);
    put_u16(out, quantity);
    return out;
}

std::vector<std::uint8_t> write_single_request(std::uint16_t address, std::uint16_t value) {
    std::vector<std::uint8_t> out{static_cast<std::uint8_t>(Function::write_single)};
    put_u16(out, address);
    put_u16(out, value);
    return out;
}

std::vector<std::uint8_t> write_multiple_request(std::uint16_t start, std::span<const std::uint16_t> values) {
    std::vector<std::uint8_t> out{static_cast<std::uint8_t>(Function::write_multiple)};
    put_u16(out, start);
    put_u16(out, static_cast<std::uint16_t>(values.size()));
    out.push_back(static_cast<std::uint8_t>(values.size() * 2));
    for (std::uint16_t v : values) put_u16(out, v);
    return out;
}

namespace {

void check_exception(std::uint8_t fn, std::span<const std::uint8_t> pdu) {
    if (pdu.empty()) throw ProtocolError("modbus: empty response");
    if (pdu[0] == (fn | 0x80)) {
        const std::uint8_t code = pdu.size() > 1 ? pdu[1] : 0;
        throw ProtocolError("modbus: exception 0x0" + std::to_string(code) + " for function " +
                                std::to_string(fn),
                            code);
    }
    if (pdu[0] != fn) throw ProtocolError("modbus: response function does not match request");
}

}  // namespace

std::vector<std::uint16_t> decode_read_response(Function fn, std::uint16_t quantity,
                                                std::span<const std::uint8_t> pdu) {
    check_exception(static_cast<std::uint8_t>(fn), pdu);
    if (pdu.size() < 2 || pdu[1] != quantity * 2 || pdu.size() != 2u + pdu[1])
        throw ProtocolError("modbus: read response has wrong byte count");
    std::vector<std::uint16_t> values(quantity);
    for (std::size_t i = 0; i < quantity; ++i) values[i] = get_u16(pdu, 2 + 2 * i);
    return values;
}

void decode_write_response(std::span<const std::uint8_t> request, std::span<const std::uint8_t> pdu) {
    check_exception(request[0], pdu);
    if (pdu.size() != 5 || !std::equal(pdu.begin(), pdu.end(), request.begin()))
        throw ProtocolError("modbus: write response does not echo the request");
}

}  // namespace softhand::modbus
