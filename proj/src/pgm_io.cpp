#include "zspad/pgm_io.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "zspad/hashing.hpp"

namespace zspad {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(char(c));
    c = in.get();
  }
  if (c != EOF) in.unget();  // keep the single whitespace before the payload
  return tok;
}

int parse_positive(const std::string& tok, const char* what, long max_value) {
  if (tok.empty()) throw FormatError(std::string("PGM header: missing ") + what);
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw FormatError(std::string("PGM header: non-numeric ") + what + " '" + tok + "'");
  long v = 0;
  try {
    v = std::stol(tok);
  } catch (const std::exception&) {
    throw FormatError(std::string("PGM header: unparsable ") + what);
  }
  if (v <= 0 || v > max_value)
    throw FormatError(std::string("PGM header: ") + what + " out of range");
  return int(v);
}

}  // namespace

BScan load_bscan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  const std::string magic = next_token(in);
  if (magic == "P2") throw FormatError("ASCII PGM (P2) is not supported, expected binary P5");
  if (magic != "P5") throw FormatError("not a binary PGM (P5) file: '" + path.string() + "'");

  const int width = parse_positive(next_token(in), "width", 1 << 20);
  const int height = parse_positive(next_token(in), "height", 1 << 20);
  const int maxval = parse_positive(next_token(in), "maxval", 65535);
  in.get();  // single whitespace byte separating header and payload

  const size_t n = size_t(width) * size_t(height);
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * size_t(bytes_per));
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (size_t(in.gcount()) != raw.size())
    throw CorruptionError("truncated PGM payload in '" + path.string() + "'");

  BScan b = make_bscan(height, width);
  const double scale = 1.0 / double(maxval);
  for (size_t i = 0; i < n; ++i) {
    unsigned value = bytes_per == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
    if (value > unsigned(maxval))
      throw CorruptionError("PGM sample exceeds maxval in '" + path.string() + "'");
    b.pixels[i] = double(value) * scale;
  }
  return b;
}

void save_bscan(const BScan& b, const std::filesystem::path& path, int bit_depth) {
  validate(b);
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("bit_depth must be 8 or 16");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");

  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << "P5\n" << b.width << " " << b.height << "\n" << maxval << "\n";

  std::vector<unsigned char> raw;
  raw.reserve(b.pixels.size() * (bit_depth == 8 ? 1 : 2));
  for (double p : b.pixels) {
    long q = std::lround(p * maxval);
    if (q < 0) q = 0;
    if (q > maxval) q = maxval;
    if (bit_depth == 8) {
      raw.push_back(static_cast<unsigned char>(q));
    } else {
      raw.push_back(static_cast<unsigned char>(q >> 8));  // big-endian
      raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  uint64_t h = kFnvBasis;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, size_t(in.gcount()), h);
  return h;
}

}  // namespace zspad
