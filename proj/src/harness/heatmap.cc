// Copyright 2026 The bcood Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bcood/harness/heatmap.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bcood::harness {

std::vector<HeatmapPoint> heatmap_points(const EvalReport& r) {
  std::map<int, std::pair<HeatmapPoint, int>> by_start;
  for (const EpisodeResult& e : r.episodes) {
    auto [it, fresh] = by_start.try_emplace(e.index, HeatmapPoint{e.initial_position, 0.0}, 0);
    it->second.first.reward += e.final_reward;
    it->second.second += 1;
  }
  std::vector<HeatmapPoint> out;
  out.reserve(by_start.size());
  for (auto& [index, acc] : by_start) {
    acc.first.reward /= acc.second;
    out.push_back(acc.first);
  }
  return out;
}

double idw(const std::vector<HeatmapPoint>& pts, const Vector2d& q, int k, double power) {
  if (pts.empty()) throw std::invalid_argument("idw: no points");
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d.emplace_back((pts[i].position - q).squaredNorm(), i);
  }
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());
  if (d[0].first == 0.0) return pts[d[0].second].reward;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / std::pow(std::sqrt(d[j].first), power);
    num += w * pts[d[j].second].reward;
    den += w;
  }
  return num / den;
}

Eigen::MatrixXd idw_grid(const std::vector<HeatmapPoint>& pts, const HeatmapOptions& opt) {
  Eigen::MatrixXd g(opt.grid, opt.grid);
  const double cell = 2.0 * opt.extent / opt.grid;
  for (int row = 0; row < opt.grid; ++row) {
    for (int col = 0; col < opt.grid; ++col) {
      const Vector2d q(opt.target.x() - opt.extent + (col + 0.5) * cell,
                       opt.target.y() - opt.extent + (row + 0.5) * cell);
      g(row, col) = idw(pts, q, opt.neighbours, opt.power);
    }
  }
  return g;
}

namespace {

// Five-stop viridis approximation on [0, 1].
std::string colour(double v) {
  static const double stops[5][3] = {{68, 1, 84},
                                     {59, 82, 139},
                                     {33, 145, 140},
                                     {94, 201, 98},
                                     {253, 231, 37}};
  v = std::clamp(v, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(v));
  const double f = v - i;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace

std::string heatmap_svg(const Eigen::MatrixXd& grid, const HeatmapOptions& opt) {
  const int n = static_cast<int>(grid.rows());
  const double px = 4.0;  // pixels per cell
  const double size = n * px;
  const double scale = size / (2.0 * opt.extent);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 60 << "\" height=\""
    << size << "\" shape-rendering=\"crispEdges\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      o << "<rect x=\"" << col * px << "\" y=\"" << row * px << "\" width=\"" << px
        << "\" height=\"" << px << "\" fill=\"" << colour(grid(row, col)) << "\"/>\n";
    }
  }
  const double c = size / 2.0;
  for (const double r : {opt.torus_inner, opt.torus_outer}) {
    o << "<circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << r * scale
      << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
  }
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    o << "<rect x=\"" << size + 10 << "\" y=\"" << (1.0 - v) * (size - 20) << "\" width=\"14\" "
      << "height=\"" << (size - 20) / 10.0 + 1 << "\" fill=\"" << colour(v) << "\"/>\n";
  }
  o << "<text x=\"" << size + 28 << "\" y=\"10\">1</text>\n";
  o << "<text x=\"" << size + 28 << "\" y=\"" << size - 10 << "\">0</text>\n";
  o << "</svg>\n";
  return o.str();
}

HeatmapFiles export_heatmap(const EvalReport& r, const std::string& out,
                            const HeatmapOptions& opt) {
  const std::vector<HeatmapPoint> pts = heatmap_points(r);
  HeatmapFiles files;
  files.csv = out + ".csv";
  {
    std::ofstream f(files.csv);
    if (!f) throw std::runtime_error("cannot write " + files.csv);
    f.precision(17);
    f << "x,y,final_reward\n";
    for (const HeatmapPoint& p : pts) {
      f << p.position.x() << ',' << p.position.y() << ',' << p.reward << '\n';
    }
  }
  if (pts.size() < 3) return files;
  files.svg = out + ".svg";
  std::ofstream f(files.svg);
  if (!f) throw std::runtime_error("cannot write " + files.svg);
  f << heatmap_svg(idw_grid(pts, opt), opt);
  return files;
}

}  // namespace bcood::harness
