#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <gem/types.hpp>

namespace gem::detail {

void put_u64(std::ostream& out, std::uint64_t v);
std::uint64_t get_u64(std::istream& in);
void put_i64(std::ostream& out, std::int64_t v);
std::int64_t get_i64(std::istream& in);
void put_f64(std::ostream& out, double v);
double get_f64(std::istream& in);
void put_str(std::ostream& out, const std::string& s);
std::string get_str(std::istream& in);
void put_matrix(std::ostream& out, const Matrix& m);
Matrix get_matrix(std::istream& in);

}  // namespace gem::detail
