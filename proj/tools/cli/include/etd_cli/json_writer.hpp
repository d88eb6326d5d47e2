#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "etd/mdp.hpp"

namespace etd::cli {

/// Minimal streaming JSON emitter. Doubles are written with 17 significant
/// digits so reports round-trip exactly; non-finite values become null.
class JsonWriter {
 public:
  explicit JsonWriter(int indent = 2) : indent_(indent) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double x);
  JsonWriter& value(std::int64_t x);
  JsonWriter& value(int x) { return value(static_cast<std::int64_t>(x)); }
  JsonWriter& value(std::uint64_t x);
  JsonWriter& value(bool b);
  JsonWriter& value(std::string_view s);
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& null();
  JsonWriter& value(const Vector& v);
  JsonWriter& value(const Matrix& m);  // array of rows

  template <typename T>
  JsonWriter& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  const std::string& str() const { return out_; }

 private:
  void before_value();
  void newline();

  std::string out_;
  int indent_;
  // One entry per open container: number of elements written so far.
  std::vector<int> counts_;
  bool after_key_ = false;
};

std::string escape_json(std::string_view s);

}  // namespace etd::cli
