#include "umed/space_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "umed/numeric.hpp"

namespace umed {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

// Cursor over raw text that tracks 1-based line and column for error
// messages.
class Cursor {
public:
  explicit Cursor(const std::string& text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek())))
      advance();
  }

  void skip_ws_and_comments() {
    for (;;) {
      skip_ws();
      if (!done() && peek() == '#') {
        while (!done() && peek() != '\n') advance();
        continue;
      }
      return;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(msg, line_, col_);
  }

  // Longest numeric token starting here; moves the cursor past it.
  double parse_double(const char* what) {
    const int line = line_, col = col_;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr == begin)
      throw FormatError(std::string("expected ") + what, line, col);
    for (const char* p = begin; p != res.ptr; ++p) advance();
    return value;
  }

  long long parse_int(const char* what) {
    const int line = line_, col = col_;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    long long value = 0;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr == begin)
      throw FormatError(std::string("expected ") + what, line, col);
    for (const char* p = begin; p != res.ptr; ++p) advance();
    return value;
  }

  int line() const { return line_; }
  int col() const { return col_; }

private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

DistanceMatrixSpace parse_matrix(const std::string& text) {
  Cursor cur(text);
  cur.skip_ws_and_comments();
  if (cur.done()) cur.fail("expected point count");
  const long long n = cur.parse_int("point count");
  if (n < 1) cur.fail("point count must be >= 1");
  if (n > 100'000) cur.fail("point count too large");

  Eigen::MatrixXd d(n, n);
  for (long long i = 0; i < n; ++i) {
    for (long long j = 0; j < n; ++j) {
      cur.skip_ws_and_comments();
      if (cur.done())
        cur.fail("expected distance (" + std::to_string(i + 1) + "," +
                 std::to_string(j + 1) + ")");
      d(i, j) = cur.parse_double("distance");
    }
  }
  cur.skip_ws_and_comments();
  if (!cur.done()) cur.fail("trailing content after matrix");
  return DistanceMatrixSpace(std::move(d));
}

// Grammar: node := 'p' INT | '(' node (',' node)+ ')' ':' NUMBER
int parse_dendro_node(Cursor& cur, std::vector<DendrogramSpace::Node>& nodes) {
  cur.skip_ws();
  if (cur.done()) cur.fail("expected leaf or '('");
  if (cur.peek() == 'p') {
    cur.advance();
    const long long label = cur.parse_int("leaf number after 'p'");
    if (label < 1) cur.fail("leaf labels start at p1");
    DendrogramSpace::Node leaf;
    leaf.point = static_cast<int>(label - 1);
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size() - 1);
  }
  if (cur.peek() != '(') cur.fail("expected leaf 'pN' or '('");
  cur.advance();

  std::vector<int> children;
  children.push_back(parse_dendro_node(cur, nodes));
  cur.skip_ws();
  while (!cur.done() && cur.peek() == ',') {
    cur.advance();
    children.push_back(parse_dendro_node(cur, nodes));
    cur.skip_ws();
  }
  if (children.size() < 2)
    cur.fail("internal node needs at least 2 children");
  if (cur.done() || cur.peek() != ')') cur.fail("expected ')' or ','");
  cur.advance();
  cur.skip_ws();
  if (cur.done() || cur.peek() != ':') cur.fail("expected ':height'");
  cur.advance();
  cur.skip_ws();
  const int hline = cur.line(), hcol = cur.col();
  const double height = cur.parse_double("height");
  if (!(height > 0.0) || !std::isfinite(height))
    throw FormatError("height must be positive and finite", hline, hcol);

  DendrogramSpace::Node node;
  node.height = height;
  node.children = std::move(children);
  nodes.push_back(std::move(node));
  return static_cast<int>(nodes.size() - 1);
}

void write_dendro_node(const DendrogramSpace& tree, int id, std::string& out) {
  const auto& node = tree.node(id);
  if (node.children.empty()) {
    out += "p" + std::to_string(node.point + 1);
    return;
  }
  out += '(';
  bool first = true;
  for (int child : node.children) {
    if (!first) out += ',';
    first = false;
    write_dendro_node(tree, child, out);
  }
  out += "):" + format_double(node.height);
}

}  // namespace

DistanceMatrixSpace load_matrix(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str());
}

DistanceMatrixSpace load_matrix(const std::filesystem::path& path) {
  return parse_matrix(read_file(path));
}

void save_matrix(const DistanceMatrixSpace& space, std::ostream& out) {
  const auto& d = space.matrix();
  const int n = space.size();
  std::string text = std::to_string(n);
  text += '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) text += ' ';
      text += format_double(d(i, j));
    }
    text += '\n';
  }
  out << text;
}

void save_matrix(const DistanceMatrixSpace& space,
                 const std::filesystem::path& path) {
  std::ostringstream buf;
  save_matrix(space, buf);
  write_file(path, buf.str());
}

DendrogramSpace parse_dendrogram(const std::string& text) {
  Cursor cur(text);
  cur.skip_ws_and_comments();
  if (cur.done()) cur.fail("empty dendrogram");
  std::vector<DendrogramSpace::Node> nodes;
  const int root = parse_dendro_node(cur, nodes);
  cur.skip_ws_and_comments();
  if (!cur.done()) cur.fail("trailing content after dendrogram");
  return DendrogramSpace(std::move(nodes), root);
}

DendrogramSpace load_dendrogram(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dendrogram(buf.str());
}

DendrogramSpace load_dendrogram(const std::filesystem::path& path) {
  return parse_dendrogram(read_file(path));
}

void save_dendrogram(const DendrogramSpace& space, std::ostream& out) {
  std::string text;
  write_dendro_node(space, space.root(), text);
  text += '\n';
  out << text;
}

void save_dendrogram(const DendrogramSpace& space,
                     const std::filesystem::path& path) {
  std::ostringstream buf;
  save_dendrogram(space, buf);
  write_file(path, buf.str());
}

std::shared_ptr<const Space> load_space(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Cursor cur(text);
  cur.skip_ws_and_comments();
  if (cur.done()) cur.fail("empty instance file");
  const char c = cur.peek();
  if (c == '(' || c == 'p')
    return std::make_shared<DendrogramSpace>(parse_dendrogram(text));
  return std::make_shared<DistanceMatrixSpace>(parse_matrix(text));
}

void save_space(const Space& space, const std::filesystem::path& path) {
  const auto* tree = dynamic_cast<const DendrogramSpace*>(&space);
  if (tree && path.extension() == ".dend") {
    save_dendrogram(*tree, path);
    return;
  }
  if (const auto* m = dynamic_cast<const DistanceMatrixSpace*>(&space)) {
    save_matrix(*m, path);
    return;
  }
  if (!tree) throw DomainError("save_space: unknown space backing");
  save_matrix(dendrogram_to_matrix(*tree), path);
}

}  // namespace umed
