#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace macmarl::bin {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts need byte swapping");

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
  requires std::is_arithmetic_v<T>
void write(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T read(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw FormatError("unexpected end of data");
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::uint64_t max_size = 1u << 26) {
  const auto n = read<std::uint64_t>(in);
  if (n > max_size) throw FormatError("string length out of range");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("unexpected end of data");
  return s;
}

/// Length-prefixed vector of doubles (u32 length, f64 entries).
inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  write<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline Eigen::VectorXd read_vector(std::istream& in, std::uint32_t max_size = 1u << 24) {
  const auto n = read<std::uint32_t>(in);
  if (n > max_size) throw FormatError("vector length out of range");
  Eigen::VectorXd v(n);
  if (n && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw FormatError("unexpected end of data");
  return v;
}

/// Four-character tag plus version.
inline void write_header(std::ostream& out, const char (&magic)[5], std::uint32_t version) {
  out.write(magic, 4);
  write<std::uint32_t>(out, version);
}

inline void expect_header(std::istream& in, const char (&magic)[5], std::uint32_t version) {
  char tag[4];
  if (!in.read(tag, 4) || std::string(tag, 4) != std::string(magic, 4))
    throw FormatError(std::string("bad magic, expected ") + magic);
  if (const auto v = read<std::uint32_t>(in); v != version)
    throw FormatError("unsupported version " + std::to_string(v) + " for " + magic);
}

}  // namespace macmarl::bin
