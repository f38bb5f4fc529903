#include "msid/dataset.hpp"

#include "msid/format.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace msid {

Dataset::Dataset(Mat inputs, Mat outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  require_shape(inputs_.rows() == outputs_.rows(),
                "dataset: input and output lengths differ");
  require_shape(inputs_.allFinite() && outputs_.allFinite(),
                "dataset: non-finite sample");
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  const int channels = data.output_channels();
  require_shape(data.input_channels() == channels || data.size() == 0,
                "write_csv: channel counts of u and y differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "k";
  if (channels <= 1) {
    out << ",u,y";
  } else {
    for (int c = 1; c <= channels; ++c) out << ",u" << c << ",y" << c;
  }
  out << '\n';
  for (int k = 1; k <= data.size(); ++k) {
    out << k;
    for (int c = 0; c < channels; ++c)
      out << ',' << format_double(data.u(k, c)) << ',' << format_double(data.y(k, c));
    out << '\n';
  }
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto cells = [](std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const std::vector<std::string> header = cells(line);
  const int columns = static_cast<int>(header.size());
  const int channels = (columns - 1) / 2;
  bool header_ok = columns >= 3 && (columns - 1) % 2 == 0 && header[0] == "k";
  for (int c = 0; header_ok && c < channels; ++c) {
    const std::string suffix = channels == 1 ? "" : std::to_string(c + 1);
    header_ok = header[1 + 2 * c] == "u" + suffix && header[2 + 2 * c] == "y" + suffix;
  }
  if (!header_ok)
    throw std::runtime_error(path.string() + ": header must be k,u,y or k,u1,y1,...");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> row_cells = cells(line);
    if (static_cast<int>(row_cells.size()) != columns)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": wrong column count");
    std::vector<double> row;
    for (const std::string& cell : row_cells) {
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end)
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": not a number: '" + cell + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  Mat u(rows.size(), channels), y(rows.size(), channels);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < channels; ++c) {
      u(r, c) = rows[r][1 + 2 * c];
      y(r, c) = rows[r][2 + 2 * c];
    }
  }
  return Dataset(std::move(u), std::move(y));
}

}  // namespace msid
