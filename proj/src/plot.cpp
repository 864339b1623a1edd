#include "storytopics/plot.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "storytopics/errors.hpp"

namespace storytopics {

MarkerStyle marker_style(DomainLabel label) {
  switch (label) {
    case DomainLabel::Health: return {"circle", "#7b3294"};
    case DomainLabel::Entertainment: return {"cross", "#d8c49a"};
    case DomainLabel::Energy: return {"diamond", "#008080"};
    case DomainLabel::Safety: return {"plus", "#b0063a"};
    case DomainLabel::Other: return {"square", "#f28e2b"};
  }
  return {"square", "#f28e2b"};
}

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 640.0;
constexpr double kMargin = 40.0;
constexpr double kLegendWidth = 150.0;
constexpr double kSize = 3.5;

std::string marker(DomainLabel label, double x, double y, std::string_view cls) {
  const auto style = marker_style(label);
  const auto shape = style.shape;
  const auto attrs = fmt::format(R"(class="{} {}" data-domain="{}")", cls, shape, to_string(label));
  if (shape == "circle") {
    return fmt::format(R"(<circle {} cx="{:.3f}" cy="{:.3f}" r="{}" fill="none" stroke="{}"/>)", attrs, x, y,
                       kSize, style.color);
  }
  if (shape == "square") {
    return fmt::format(R"(<rect {} x="{:.3f}" y="{:.3f}" width="{}" height="{}" fill="none" stroke="{}"/>)",
                       attrs, x - kSize, y - kSize, 2 * kSize, 2 * kSize, style.color);
  }
  if (shape == "diamond") {
    return fmt::format(R"(<polygon {} points="{:.3f},{:.3f} {:.3f},{:.3f} {:.3f},{:.3f} {:.3f},{:.3f}" fill="none" stroke="{}"/>)",
                       attrs, x, y - kSize, x + kSize, y, x, y + kSize, x - kSize, y, style.color);
  }
  if (shape == "cross") {
    return fmt::format(R"(<path {} d="M{:.3f},{:.3f}L{:.3f},{:.3f}M{:.3f},{:.3f}L{:.3f},{:.3f}" stroke="{}"/>)", attrs,
                       x - kSize, y - kSize, x + kSize, y + kSize, x - kSize, y + kSize, x + kSize, y - kSize,
                       style.color);
  }
  return fmt::format(R"(<path {} d="M{:.3f},{:.3f}L{:.3f},{:.3f}M{:.3f},{:.3f}L{:.3f},{:.3f}" stroke="{}"/>)", attrs,
                     x - kSize, y, x + kSize, y, x, y - kSize, x, y + kSize, style.color);
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void render_svg(std::ostream& out, const Projection2D& projection, std::string_view title) {
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
                     kWidth + kLegendWidth, kHeight, kWidth + kLegendWidth, kHeight)
      << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  if (!title.empty()) {
    out << fmt::format(R"(<text x="{}" y="24" font-family="sans-serif" font-size="16">{}</text>)", kMargin, xml_escape(title))
        << '\n';
  }

  const auto& c = projection.coords;
  if (c.rows() > 0) {
    const double xmin = c.col(0).minCoeff();
    const double xmax = c.col(0).maxCoeff();
    const double ymin = c.col(1).minCoeff();
    const double ymax = c.col(1).maxCoeff();
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    out << "<g class=\"points\">\n";
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double x = kMargin + (c(i, 0) - xmin) / xspan * (kWidth - 2 * kMargin);
      const double y = kHeight - kMargin - (c(i, 1) - ymin) / yspan * (kHeight - 2 * kMargin);
      out << marker(projection.labels[static_cast<std::size_t>(i)], x, y, "marker") << '\n';
    }
    out << "</g>\n";
  }

  out << "<g class=\"legend\">\n";
  double y = kMargin + 10;
  for (auto label : {DomainLabel::Health, DomainLabel::Entertainment, DomainLabel::Energy, DomainLabel::Safety,
                     DomainLabel::Other}) {
    out << marker(label, kWidth + 10, y, "legend-marker") << '\n';
    out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>)", kWidth + 22,
                       y + 4, to_string(label))
        << '\n';
    y += 20;
  }
  out << "</g>\n</svg>\n";
}

void plot(const Projection2D& projection, const std::filesystem::path& out, std::string_view title) {
  std::ofstream file(out);
  if (!file) throw IoError("cannot write " + out.string());
  render_svg(file, projection, title);
  if (!file) throw IoError("write failed for " + out.string());
}

}  // namespace storytopics
