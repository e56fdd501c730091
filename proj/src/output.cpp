#include "cmcfol/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cmcfol/errors.hpp"

namespace cmcfol::cli {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!needs_comma_.empty()) {
    if (needs_comma_.back()) out_ += ',';
    needs_comma_.back() = true;
    newline();
  }
}

void JsonWriter::newline() {
  out_ += '\n';
  out_.append(2 * needs_comma_.size(), ' ');
}

void JsonWriter::begin_object() {
  separate();
  out_ += '{';
  needs_comma_.push_back(false);
}

void JsonWriter::end_object() {
  const bool had = needs_comma_.back();
  needs_comma_.pop_back();
  if (had) newline();
  out_ += '}';
}

void JsonWriter::begin_array() {
  separate();
  out_ += '[';
  needs_comma_.push_back(false);
}

void JsonWriter::end_array() {
  const bool had = needs_comma_.back();
  needs_comma_.pop_back();
  if (had) newline();
  out_ += ']';
}

void JsonWriter::key(const std::string& name) {
  separate();
  out_ += '"';
  out_ += name;
  out_ += "\": ";
  after_key_ = true;
}

void JsonWriter::value(double v) {
  separate();
  out_ += format_double(v);
}

void JsonWriter::value(int v) {
  separate();
  out_ += std::to_string(v);
}

void JsonWriter::value(bool v) {
  separate();
  out_ += v ? "true" : "false";
}

void JsonWriter::value(const char* v) { value(std::string(v)); }

void JsonWriter::value(const std::string& v) {
  separate();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out_ += buf;
        } else {
          out_ += c;
        }
    }
  }
  out_ += '"';
}

void JsonWriter::key_value(const std::string& name, const std::array<double, 3>& v) {
  key(name);
  begin_array();
  value(v[0]);
  value(v[1]);
  value(v[2]);
  end_array();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace cmcfol::cli
