#include "odt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace odt {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": shape mismatch");
}

std::vector<double> gaussian_taps() {
  std::vector<double> t(kSsimWindow);
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    t[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
    sum += t[i];
  }
  for (auto& v : t) v /= sum;
  return t;
}

// Separable valid-mode filtering: (w,h) -> (w-10, h-10).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& taps, int& ow, int& oh) {
  const int k = int(taps.size());
  ow = w - k + 1;
  oh = h - k + 1;
  std::vector<double> rows(std::size_t(ow) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * img[std::size_t(y) * w + x + i];
      rows[std::size_t(y) * ow + x] = s;
    }
  std::vector<double> out(std::size_t(ow) * oh, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * rows[std::size_t(y + i) * ow + x];
      out[std::size_t(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double mse(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "mse");
  if (a.empty()) throw ValidationError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / double(a.size());
}

double mse(const Volume3& a, const Volume3& b) {
  require_same_grid(a.grid, b.grid, "mse");
  return mse(std::span(a.data), std::span(b.data));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "pearson");
  if (a.size() < 2) throw ValidationError("pearson: need at least two samples");
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw ValidationError("pearson: degenerate input (zero variance)");
  return sab / std::sqrt(saa * sbb);
}

double pearson(const Volume3& a, const Volume3& b) {
  require_same_grid(a.grid, b.grid, "pearson");
  return pearson(std::span(a.data), std::span(b.data));
}

double ssim(std::span<const double> a, std::span<const double> b, int w, int h,
            double dynamic_range) {
  require_same_size(a.size(), b.size(), "ssim");
  if (w < kSsimWindow || h < kSsimWindow)
    throw ValidationError("ssim: slice smaller than the 11x11 window");
  if (std::size_t(w) * std::size_t(h) != a.size())
    throw ValidationError("ssim: dimensions do not match the data length");

  double L = dynamic_range;
  if (L <= 0.0) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : a) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double v : b) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    L = hi - lo;
  }
  if (!(L > 0.0)) throw ValidationError("ssim: dynamic range L <= 0");
  const double c1 = (kSsimK1 * L) * (kSsimK1 * L);
  const double c2 = (kSsimK2 * L) * (kSsimK2 * L);

  const std::size_t n = a.size();
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = xa[i] * xa[i];
    bb[i] = xb[i] * xb[i];
    ab[i] = xa[i] * xb[i];
  }
  const auto taps = gaussian_taps();
  int ow = 0, oh = 0;
  const auto mu_a = filter_valid(xa, w, h, taps, ow, oh);
  const auto mu_b = filter_valid(xb, w, h, taps, ow, oh);
  const auto m_aa = filter_valid(aa, w, h, taps, ow, oh);
  const auto m_bb = filter_valid(bb, w, h, taps, ow, oh);
  const auto m_ab = filter_valid(ab, w, h, taps, ow, oh);

  double total = 0.0;
  const std::size_t m = mu_a.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    total += (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return total / double(m);
}

SliceReport evaluate_slices(const Volume3& a, const Volume3& b, double z_range_um) {
  require_sized(a, "evaluate_slices");
  require_same_grid(a.grid, b.grid, "evaluate_slices");
  const auto& g = a.grid;
  const std::size_t slice = std::size_t(g.nx) * g.ny;

  SliceReport report;
  std::vector<double> incl_a, incl_b;
  double ssim_sum = 0.0;
  int ssim_count = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int z = 0; z < g.nz; ++z) {
    const double zu = g.pos(2, z);
    if (z_range_um > 0.0 && std::abs(zu) > z_range_um) continue;
    std::span<const double> sa(a.data.data() + std::size_t(z) * slice, slice);
    std::span<const double> sb(b.data.data() + std::size_t(z) * slice, slice);
    SliceRow row;
    row.z_index = z;
    row.z_um = zu;
    row.mse = mse(sa, sb);
    try {
      row.ssim = ssim(sa, sb, g.nx, g.ny);
      ssim_sum += row.ssim;
      ++ssim_count;
    } catch (const ValidationError&) {
      row.ssim = nan;
    }
    try {
      row.pearson = pearson(sa, sb);
    } catch (const ValidationError&) {
      row.pearson = nan;
    }
    report.rows.push_back(row);
    incl_a.insert(incl_a.end(), sa.begin(), sa.end());
    incl_b.insert(incl_b.end(), sb.begin(), sb.end());
  }
  if (report.rows.empty()) throw ValidationError("evaluate_slices: no slices in the z range");

  report.vol_mse = mse(std::span(incl_a), std::span(incl_b));
  try {
    report.vol_pearson = pearson(std::span(incl_a), std::span(incl_b));
  } catch (const ValidationError&) {
    report.vol_pearson = nan;
  }
  report.vol_ssim = ssim_count > 0 ? ssim_sum / ssim_count : nan;
  return report;
}

void write_csv(const SliceReport& report, std::ostream& os) {
  os << "z_um,mse,ssim,pearson\n";
  auto cell = [&os](double v) {
    if (std::isnan(v))
      os << "nan";
    else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.9g", v);
      os << buf;
    }
  };
  for (const auto& r : report.rows) {
    cell(r.z_um);
    os << ',';
    cell(r.mse);
    os << ',';
    cell(r.ssim);
    os << ',';
    cell(r.pearson);
    os << '\n';
  }
  os << "all,";
  cell(report.vol_mse);
  os << ',';
  cell(report.vol_ssim);
  os << ',';
  cell(report.vol_pearson);
  os << '\n';
}

double fwhm_profile(const Volume3& vol, int axis, std::array<double, 3> through_um) {
  require_sized(vol, "fwhm_profile");
  if (axis < 0 || axis > 2) throw ValidationError("fwhm_profile: axis must be 0, 1 or 2");
  const auto& g = vol.grid;

  // Snap the off-axis coordinates to the nearest voxel.
  int idx[3];
  for (int a = 0; a < 3; ++a) {
    const double fi = through_um[a] / g.pitch(a) + 0.5 * (g.n(a) - 1);
    idx[a] = std::clamp(int(std::lround(fi)), 0, g.n(a) - 1);
  }
  const int n = g.n(axis);
  std::vector<double> prof(n);
  for (int i = 0; i < n; ++i) {
    idx[axis] = i;
    prof[i] = vol.at(idx[0], idx[1], idx[2]);
  }

  const auto peak_it = std::max_element(prof.begin(), prof.end());
  const int peak = int(peak_it - prof.begin());
  if (!(*peak_it > 0.0)) throw ValidationError("fwhm_profile: no peak above zero");
  const double half = 0.5 * *peak_it;
  const double pitch = g.pitch(axis);

  double left = 0.0, right = 0.0;
  bool found = false;
  for (int i = peak; i > 0; --i) {
    if (prof[i - 1] < half) {
      left = g.pos(axis, i - 1) + (half - prof[i - 1]) / (prof[i] - prof[i - 1]) * pitch;
      found = true;
      break;
    }
  }
  if (!found) throw ValidationError("fwhm_profile: no left half-maximum crossing");
  found = false;
  for (int i = peak; i < n - 1; ++i) {
    if (prof[i + 1] < half) {
      right = g.pos(axis, i) + (half - prof[i]) / (prof[i + 1] - prof[i]) * pitch;
      found = true;
      break;
    }
  }
  if (!found) throw ValidationError("fwhm_profile: no right half-maximum crossing");
  return right - left;
}

double background_std(const Volume3& vol, std::array<double, 3> center_um, double radius_um) {
  require_sized(vol, "background_std");
  const auto& g = vol.grid;
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (int z = 0; z < g.nz; ++z) {
    const double pz = g.pos(2, z) - center_um[2];
    for (int y = 0; y < g.ny; ++y) {
      const double py = g.pos(1, y) - center_um[1];
      const std::size_t row = g.index(0, y, z);
      for (int x = 0; x < g.nx; ++x) {
        const double px = g.pos(0, x) - center_um[0];
        if (px * px + py * py + pz * pz <= radius_um * radius_um) continue;
        const double v = vol.data[row + x];
        sum += v;
        sum2 += v * v;
        ++count;
      }
    }
  }
  if (count < 2) throw ValidationError("background_std: exclusion region covers the volume");
  const double mean = sum / double(count);
  return std::sqrt(std::max(0.0, sum2 / double(count) - mean * mean));
}

}  // namespace odt
