#pragma once

// Deterministic machine-readable output: fixed field order, 17-significant-
// digit decimal floats, byte-identical across runs with the same config.

#include <array>
#include <string>
#include <vector>

namespace cmcfol::cli {

inline constexpr const char* kSchemaVersion = "cmcfol-1";

class JsonWriter {
 public:
  void begin_object();
  void end_object();
  void begin_array();
  void end_array();
  void key(const std::string& name);
  void value(double v);
  void value(int v);
  void value(bool v);
  void value(const char* v);
  void value(const std::string& v);
  void key_value(const std::string& name, double v) { key(name); value(v); }
  void key_value(const std::string& name, int v) { key(name); value(v); }
  void key_value(const std::string& name, bool v) { key(name); value(v); }
  void key_value(const std::string& name, const char* v) { key(name); value(v); }
  void key_value(const std::string& name, const std::string& v) { key(name); value(v); }
  void key_value(const std::string& name, const std::array<double, 3>& v);

  const std::string& str() const { return out_; }

 private:
  void separate();
  void newline();
  std::string out_;
  std::vector<bool> needs_comma_;
  bool after_key_ = false;
};

std::string format_double(double v);

// Writes bytes exactly (binary mode); creates parent directories.
void write_file(const std::string& path, const std::string& contents);

}  // namespace cmcfol::cli
