#include "hypobridge/model_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hypobridge {

namespace {

using nlohmann::json;

Matrix json_to_matrix(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(key + ": expected a non-empty array of rows");
  }
  const size_t rows = j.size();
  size_t cols = 0;
  Matrix m;
  for (size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.empty()) {
      throw ParseError(key + "[" + std::to_string(r) +
                       "]: expected a non-empty row array");
    }
    if (r == 0) {
      cols = row.size();
      m.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (row.size() != cols) {
      throw ParseError(key + "[" + std::to_string(r) + "]: row has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(cols));
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ParseError(key + "[" + std::to_string(r) + "][" +
                         std::to_string(c) + "]: not a number");
      }
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          row[c].get<double>();
    }
  }
  if (!m.allFinite()) {
    throw ParseError(key + ": entries must be finite");
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// --- minimal TOML subset ---------------------------------------------------
// Covers exactly the model schema: top-level `key = value` pairs where value
// is a number, a (possibly multi-line) array of arrays of numbers, or a
// double-quoted string. Comments start with '#'.

struct TomlCursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') ++line;
    ++pos;
  }
  void skip_ws_and_comments(bool cross_lines) {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' ||
                 (cross_lines && c == '\n')) {
        advance();
      } else {
        break;
      }
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("toml line " + std::to_string(line) + ": " + msg);
  }
};

double toml_number(TomlCursor& cur) {
  const size_t start = cur.pos;
  while (!cur.eof() &&
         (std::isdigit(static_cast<unsigned char>(cur.peek())) ||
          cur.peek() == '+' || cur.peek() == '-' || cur.peek() == '.' ||
          cur.peek() == 'e' || cur.peek() == 'E')) {
    cur.advance();
  }
  if (cur.pos == start) cur.fail("expected a number");
  try {
    return std::stod(cur.text.substr(start, cur.pos - start));
  } catch (const std::exception&) {
    cur.fail("bad number '" + cur.text.substr(start, cur.pos - start) + "'");
  }
}

std::vector<double> toml_number_row(TomlCursor& cur) {
  std::vector<double> row;
  cur.skip_ws_and_comments(true);
  if (cur.eof() || cur.peek() != '[') cur.fail("expected '[' starting a row");
  cur.advance();
  while (true) {
    cur.skip_ws_and_comments(true);
    if (cur.eof()) cur.fail("unterminated row");
    if (cur.peek() == ']') {
      cur.advance();
      break;
    }
    row.push_back(toml_number(cur));
    cur.skip_ws_and_comments(true);
    if (!cur.eof() && cur.peek() == ',') cur.advance();
  }
  return row;
}

Matrix toml_matrix(TomlCursor& cur, const std::string& key) {
  cur.skip_ws_and_comments(true);
  if (cur.eof() || cur.peek() != '[') {
    cur.fail(key + ": expected '[' starting a matrix");
  }
  cur.advance();
  std::vector<std::vector<double>> rows;
  while (true) {
    cur.skip_ws_and_comments(true);
    if (cur.eof()) cur.fail(key + ": unterminated matrix");
    if (cur.peek() == ']') {
      cur.advance();
      break;
    }
    rows.push_back(toml_number_row(cur));
    cur.skip_ws_and_comments(true);
    if (!cur.eof() && cur.peek() == ',') cur.advance();
  }
  if (rows.empty()) cur.fail(key + ": matrix has no rows");
  const size_t cols = rows[0].size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      cur.fail(key + " row " + std::to_string(r) + ": has " +
               std::to_string(rows[r].size()) + " entries, expected " +
               std::to_string(cols));
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string toml_string(TomlCursor& cur) {
  if (cur.eof() || cur.peek() != '"') cur.fail("expected '\"'");
  cur.advance();
  std::string out;
  while (!cur.eof() && cur.peek() != '"') {
    out.push_back(cur.peek());
    cur.advance();
  }
  if (cur.eof()) cur.fail("unterminated string");
  cur.advance();
  return out;
}

}  // namespace

ModelFile parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("json: top level must be an object");
  if (!j.contains("A")) throw ParseError("json: missing key 'A'");
  if (!j.contains("B")) throw ParseError("json: missing key 'B'");

  ModelFile mf;
  mf.A = json_to_matrix(j["A"], "A");
  mf.B = json_to_matrix(j["B"], "B");
  if (j.contains("rank_tol")) {
    if (!j["rank_tol"].is_number()) {
      throw ParseError("rank_tol: not a number");
    }
    mf.rank_tol = j["rank_tol"].get<double>();
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ParseError("label: not a string");
    mf.label = j["label"].get<std::string>();
  }
  return mf;
}

ModelFile parse_model_toml(const std::string& text) {
  TomlCursor cur{text};
  ModelFile mf;
  bool have_a = false, have_b = false;
  while (true) {
    cur.skip_ws_and_comments(true);
    if (cur.eof()) break;
    std::string key;
    while (!cur.eof() &&
           (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
            cur.peek() == '_')) {
      key.push_back(cur.peek());
      cur.advance();
    }
    if (key.empty()) cur.fail("expected a key");
    cur.skip_ws_and_comments(false);
    if (cur.eof() || cur.peek() != '=') cur.fail("expected '=' after key");
    cur.advance();
    cur.skip_ws_and_comments(false);
    if (key == "A") {
      mf.A = toml_matrix(cur, "A");
      have_a = true;
    } else if (key == "B") {
      mf.B = toml_matrix(cur, "B");
      have_b = true;
    } else if (key == "rank_tol") {
      mf.rank_tol = toml_number(cur);
    } else if (key == "label") {
      mf.label = toml_string(cur);
    } else {
      cur.fail("unknown key '" + key + "'");
    }
  }
  if (!have_a) throw ParseError("toml: missing key 'A'");
  if (!have_b) throw ParseError("toml: missing key 'B'");
  if (!mf.A.allFinite() || !mf.B.allFinite()) {
    throw ParseError("toml: entries must be finite");
  }
  return mf;
}

ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
    return parse_model_toml(buf.str());
  }
  return parse_model_json(buf.str());
}

std::string model_to_json(const ModelFile& mf) {
  json j;
  j["A"] = matrix_to_json(mf.A);
  j["B"] = matrix_to_json(mf.B);
  if (mf.rank_tol) j["rank_tol"] = *mf.rank_tol;
  if (mf.label) j["label"] = *mf.label;
  return j.dump(2) + "\n";
}

void write_model_file(const std::string& path, const ModelFile& mf) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << model_to_json(mf);
}

}  // namespace hypobridge
