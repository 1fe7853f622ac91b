#include "l2div/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "l2div/error.hpp"
#include "l2div/experiments.hpp"
#include "l2div/io.hpp"

namespace l2div::plots {

namespace {

constexpr const char* kLambdaColor = "#c0392b";
constexpr const char* kRhoColor = "#2457a6";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Range {
  double lo = 1e300, hi = -1e300;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1;
      hi += 1;
    }
  }
};

struct Panel {
  double x0, y0, width, height;
  Range xr, yr;
  double sx(double v) const { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * width; }
  double sy(double v) const { return y0 + height - (v - yr.lo) / (yr.hi - yr.lo) * height; }
};

void frame(std::ostringstream& out, const Panel& p, const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x=\"" << fmt(p.x0) << "\" y=\"" << fmt(p.y0) << "\" width=\"" << fmt(p.width) << "\" height=\""
      << fmt(p.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = p.xr.lo + (p.xr.hi - p.xr.lo) * t / 4.0;
    const double yv = p.yr.lo + (p.yr.hi - p.yr.lo) * t / 4.0;
    out << "<text x=\"" << fmt(p.sx(xv)) << "\" y=\"" << fmt(p.y0 + p.height + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    out << "<text x=\"" << fmt(p.x0 - 6) << "\" y=\"" << fmt(p.sy(yv) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << fmt(p.x0 + p.width / 2) << "\" y=\"" << fmt(p.y0 + p.height + 34)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"" << fmt(p.x0 - 40) << "\" y=\"" << fmt(p.y0 + p.height / 2) << "\" font-size=\"12\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(p.x0 - 40) << ' ' << fmt(p.y0 + p.height / 2)
      << ")\">" << ylabel << "</text>\n";
}

void polyline(std::ostringstream& out, const Panel& p, const std::vector<std::pair<double, double>>& pts,
              const char* color, const std::string& cls) {
  out << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1\" stroke-opacity=\"0.8\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    out << (i ? " " : "") << fmt(p.sx(pts[i].first)) << ',' << fmt(p.sy(pts[i].second));
  out << "\"/>\n";
}

}  // namespace

std::string figure1_svg(const std::string& divergence_csv, std::size_t replicates) {
  const auto table = io::parse_csv(divergence_csv, "divergence.csv");
  require(table.rows.rows() > 0, ErrorCode::MissingReport, "divergence.csv has no data rows");
  const auto& h = table.header;
  const auto c_rep = io::column(h, "replicate", "divergence.csv");
  const auto c_lambda = io::column(h, "lambda", "divergence.csv");
  const auto c_rho = io::column(h, "rho", "divergence.csv");
  const auto c_dl = io::column(h, "div_lambda", "divergence.csv");
  const auto c_dr = io::column(h, "div_rho", "divergence.csv");

  // replicate id -> rows, in file order
  std::map<long long, std::vector<Eigen::Index>> by_rep;
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    const auto rep = static_cast<long long>(table.rows(i, c_rep));
    if (by_rep.size() < replicates || by_rep.count(rep)) by_rep[rep].push_back(i);
  }

  Panel left{70, 40, 360, 300, {}, {}}, right{520, 40, 360, 300, {}, {}};
  for (const auto& [rep, rows] : by_rep)
    for (auto i : rows) {
      const double rho = table.rows(i, c_rho);
      left.xr.add(std::log10(table.rows(i, c_lambda)));
      if (rho > 0) right.xr.add(std::log10(rho));
      for (auto c : {c_dl, c_dr}) {
        left.yr.add(table.rows(i, c));
        right.yr.add(table.rows(i, c));
      }
    }
  left.xr.pad();
  right.xr.pad();
  left.yr.pad();
  right.yr = left.yr;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"920\" height=\"400\" viewBox=\"0 0 920 400\">\n";
  out << "<rect width=\"920\" height=\"400\" fill=\"white\"/>\n";
  out << "<text x=\"460\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">Divergence in lambda (red) and rho "
         "(blue)</text>\n";
  frame(out, left, "log10(lambda)", "divergence");
  frame(out, right, "log10(rho)", "divergence");
  for (const auto& [rep, rows] : by_rep) {
    std::vector<std::pair<double, double>> ll, lr, rl, rr;
    for (auto i : rows) {
      const double lx = std::log10(table.rows(i, c_lambda));
      ll.emplace_back(lx, table.rows(i, c_dl));
      lr.emplace_back(lx, table.rows(i, c_dr));
      const double rho = table.rows(i, c_rho);
      if (rho > 0) {
        rl.emplace_back(std::log10(rho), table.rows(i, c_dl));
        rr.emplace_back(std::log10(rho), table.rows(i, c_dr));
      }
    }
    out << "<g class=\"panel-lambda\">\n";
    polyline(out, left, ll, kLambdaColor, "div-lambda");
    polyline(out, left, lr, kRhoColor, "div-rho");
    out << "</g>\n<g class=\"panel-rho\">\n";
    polyline(out, right, rl, kLambdaColor, "div-lambda");
    polyline(out, right, rr, kRhoColor, "div-rho");
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string figure2_svg(const std::string& relerr_csv) {
  const auto raw = io::parse_raw_csv(relerr_csv, "relerr.csv");
  require(!raw.rows.empty(), ErrorCode::MissingReport, "relerr.csv has no data rows");
  const auto c_method = io::column(raw.header, "method", "relerr.csv");
  const auto c_err = io::column(raw.header, "relative_error", "relerr.csv");

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& m = raw.rows[i][c_method];
    if (!values.count(m)) order.push_back(m);
    values[m].push_back(io::parse_number(raw.rows[i][c_err], "relerr.csv", raw.line_numbers[i]));
  }

  Panel p{70, 40, 120.0 * double(order.size()), 300, {0, 100}, {0, 100}};
  p.xr = {0, double(order.size())};
  std::ostringstream out;
  const double width = p.x0 + p.width + 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"400\" viewBox=\"0 0 "
      << fmt(width) << " 400\">\n";
  out << "<rect width=\"" << fmt(width) << "\" height=\"400\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">Relative error"
      << "</text>\n";
  out << "<rect x=\"" << fmt(p.x0) << "\" y=\"" << fmt(p.y0) << "\" width=\"" << fmt(p.width) << "\" height=\""
      << fmt(p.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 4; ++t)
    out << "<text x=\"" << fmt(p.x0 - 6) << "\" y=\"" << fmt(p.sy(25.0 * t) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << 25 * t << "</text>\n";

  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& v = values[order[k]];
    const double cx = p.sx(double(k) + 0.5), half = 30;
    const double lo = quantile(v, 0), q1 = quantile(v, 0.25), med = quantile(v, 0.5), q3 = quantile(v, 0.75),
                 hi = quantile(v, 1);
    const char* color = order[k].find("rho") != std::string::npos ? kRhoColor : kLambdaColor;
    out << "<g class=\"box\" data-method=\"" << order[k] << "\">\n";
    out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(p.sy(lo)) << "\" x2=\"" << fmt(cx) << "\" y2=\""
        << fmt(p.sy(hi)) << "\" stroke=\"" << color << "\"/>\n";
    out << "<rect x=\"" << fmt(cx - half) << "\" y=\"" << fmt(p.sy(q3)) << "\" width=\"" << fmt(2 * half)
        << "\" height=\"" << fmt(p.sy(q1) - p.sy(q3)) << "\" fill=\"white\" stroke=\"" << color << "\"/>\n";
    out << "<line x1=\"" << fmt(cx - half) << "\" y1=\"" << fmt(p.sy(med)) << "\" x2=\"" << fmt(cx + half)
        << "\" y2=\"" << fmt(p.sy(med)) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(p.y0 + p.height + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << order[k] << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_figures(const std::filesystem::path& dir) {
  const auto div_path = dir / "divergence.csv";
  const auto rel_path = dir / "relerr.csv";
  require(std::filesystem::exists(div_path), ErrorCode::MissingReport, "missing " + div_path.string());
  require(std::filesystem::exists(rel_path), ErrorCode::MissingReport, "missing " + rel_path.string());
  io::write_text(dir / "figure1.svg", figure1_svg(io::read_text(div_path)));
  io::write_text(dir / "figure2.svg", figure2_svg(io::read_text(rel_path)));
}

}  // namespace l2div::plots
