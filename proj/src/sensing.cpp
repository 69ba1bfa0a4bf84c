#include "tpsim/sensing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace tpsim {

double NoiseModel::sigma(double imaging_depth, int completed) const {
  return sigma0 * std::pow(degradation_per_needle, completed) + depth_gain * std::max(0.0, imaging_depth);
}

void NoiseModel::validate() const {
  if (!(sigma0 >= 0.0)) throw ConfigError("noise.sigma0", "must be >= 0");
  if (!(depth_gain >= 0.0)) throw ConfigError("noise.depth_gain", "must be >= 0");
  if (!(degradation_per_needle >= 1.0)) throw ConfigError("noise.degradation_per_needle", "must be >= 1");
}

Observation observe(const ProstatePhantom& phantom, const RigidTransform& current, const NoiseModel& noise,
                    int completed_insertions, int volume_index, RngStream& rng) {
  Observation obs;
  obs.volume_index = volume_index;
  obs.sigma_used = noise.sigma(0.0, completed_insertions);
  obs.fiducials.reserve(phantom.targets.size());
  for (const Target& t : phantom.targets) {
    const double sd = noise.sigma(phantom.imaging_depth(t.position_rest), completed_insertions);
    const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
    obs.fiducials.push_back({t.id, apply(current, t.position_rest) + Vec3{nx, ny, nz} * sd});
  }
  return obs;
}

namespace {

struct Matched {
  std::vector<Eigen::Vector3d> ref;
  std::vector<Eigen::Vector3d> obs;
};

Eigen::Vector3d to_eigen(const Point3& p) { return {p.x, p.y, p.z}; }

Matched match_by_id(std::span<const Fiducial> reference, std::span<const Fiducial> observed) {
  std::vector<Fiducial> ref(reference.begin(), reference.end());
  std::vector<Fiducial> obs(observed.begin(), observed.end());
  auto by_id = [](const Fiducial& a, const Fiducial& b) { return a.id < b.id; };
  std::sort(ref.begin(), ref.end(), by_id);
  std::sort(obs.begin(), obs.end(), by_id);
  Matched m;
  auto r = ref.begin();
  auto o = obs.begin();
  while (r != ref.end() && o != obs.end()) {
    if (r->id < o->id) {
      ++r;
    } else if (o->id < r->id) {
      ++o;
    } else {
      m.ref.push_back(to_eigen(r->position));
      m.obs.push_back(to_eigen(o->position));
      ++r;
      ++o;
    }
  }
  return m;
}

}  // namespace

Registration rigid_register(std::span<const Fiducial> reference, std::span<const Fiducial> observed) {
  const Matched m = match_by_id(reference, observed);
  const auto n = m.ref.size();
  if (n < 3) {
    throw DegenerateConfiguration("registration needs >= 3 common fiducials, got " + std::to_string(n));
  }

  Eigen::Vector3d ca = Eigen::Vector3d::Zero();
  Eigen::Vector3d cb = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    ca += m.ref[i];
    cb += m.obs[i];
  }
  ca /= static_cast<double>(n);
  cb /= static_cast<double>(n);

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d a = m.ref[i] - ca;
    scatter += a * a.transpose();
    cross_cov += a * (m.obs[i] - cb).transpose();
  }

  // Collinear iff every point is within 1e-9 of the principal line.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> principal(scatter);
  const Eigen::Vector3d axis = principal.eigenvectors().col(2);
  double max_off_line = 0.0;
  for (const auto& p : m.ref) {
    const Eigen::Vector3d a = p - ca;
    max_off_line = std::max(max_off_line, (a - axis * axis.dot(a)).norm());
  }
  if (max_off_line <= 1e-9) throw DegenerateConfiguration("registration fiducials are collinear");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rot = v * fix * u.transpose();
  const Eigen::Vector3d trans = cb - rot * ca;

  Registration reg;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) reg.transform.rotation(i, j) = rot(i, j);
  }
  reg.transform.translation = {trans.x(), trans.y(), trans.z()};

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (rot * m.ref[i] + trans - m.obs[i]).squaredNorm();
  reg.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return reg;
}

double sum_squared_residuals(const RigidTransform& t, std::span<const Fiducial> reference,
                             std::span<const Fiducial> observed) {
  const Matched m = match_by_id(reference, observed);
  double ss = 0.0;
  for (std::size_t i = 0; i < m.ref.size(); ++i) {
    const Point3 p = apply(t, Point3{m.ref[i].x(), m.ref[i].y(), m.ref[i].z()});
    const Vec3 d = p - Point3{m.obs[i].x(), m.obs[i].y(), m.obs[i].z()};
    ss += dot(d, d);
  }
  return ss;
}

}  // namespace tpsim
