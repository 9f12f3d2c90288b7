#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wsdbias {

std::vector<std::string> split_tab(const std::string& line);
std::string join(const std::vector<std::string>& parts, char sep);

// Reads a whole file as lines; strips one trailing '\r' per line.
std::vector<std::string> read_lines(const std::string& path);

void write_file(const std::string& path, const std::string& content);

// Deterministic, locale-independent float formatting.
std::string fmt_g(double x);      // %.10g, for reports
std::string fmt_full(double x);   // %.17g, round-trips doubles

int64_t parse_i64(const std::string& s);
double parse_f64(const std::string& s);

// FNV-1a 64-bit digest, used for input provenance manifests.
uint64_t fnv1a64(std::string_view data);
uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t v);

}  // namespace wsdbias
