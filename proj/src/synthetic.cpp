#include "topoflow/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "topoflow/error.hpp"
#include "topoflow/flow.hpp"

namespace topoflow::synthetic {
namespace {

// Corner index bits: 1 = +x, 2 = +y, 4 = +z.
constexpr std::array<std::array<int, 4>, 6> kBoxSides{{
    {1, 3, 7, 5},  // +x
    {0, 4, 6, 2},  // -x
    {2, 6, 7, 3},  // +y
    {0, 1, 5, 4},  // -y
    {4, 5, 7, 6},  // +z
    {0, 2, 3, 1},  // -z
}};

void append_box(Mesh& mesh, const RigidTransform& frame, const Vec3& lo, const Vec3& hi) {
  const int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
    mesh.vertices.push_back(frame.rotation * local + frame.translation);
  }
  for (const auto& q : kBoxSides) {
    mesh.faces.push_back({base + q[0], base + q[1], base + q[2]});
    mesh.faces.push_back({base + q[0], base + q[2], base + q[3]});
  }
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

Mat3 rotation(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-15) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Mesh make_box(const Vec3& half_extents, double uv_inset) {
  Mesh mesh;
  mesh.instance = Instance::Object;
  append_box(mesh, RigidTransform{}, -half_extents, half_extents);
  std::vector<FaceUv> uvs;
  for (int side = 0; side < 6; ++side) {
    const double u0 = (side % 3) / 3.0 + uv_inset;
    const double u1 = (side % 3 + 1) / 3.0 - uv_inset;
    const double v0 = (side / 3) / 2.0 + uv_inset;
    const double v1 = (side / 3 + 1) / 2.0 - uv_inset;
    const std::array<Vec2, 4> c{Vec2(u0, v0), Vec2(u1, v0), Vec2(u1, v1), Vec2(u0, v1)};
    uvs.push_back({c[0], c[1], c[2]});
    uvs.push_back({c[0], c[2], c[3]});
  }
  mesh.face_uvs = std::move(uvs);
  return mesh;
}

Mesh make_hand(const HandPose& pose) {
  Mesh mesh;
  mesh.instance = Instance::Hand;
  // Palm in its own frame: fingers grow towards -y, the palm faces -z.
  append_box(mesh, pose.root, Vec3(-0.04, -0.045, -0.012), Vec3(0.04, 0.045, 0.012));

  struct FingerSpec {
    Vec3 base;
    double heading;  // rotation about z of the finger's rest direction
    std::array<double, 3> lengths;
    double width;
  };
  const std::array<FingerSpec, 5> fingers{{
      {Vec3(0.046, 0.0, 0.0), std::numbers::pi / 2.6, {0.022, 0.018, 0.016}, 0.018},  // thumb
      {Vec3(0.027, -0.045, 0.0), 0.0, {0.024, 0.018, 0.015}, 0.016},
      {Vec3(0.009, -0.045, 0.0), 0.0, {0.027, 0.020, 0.016}, 0.016},
      {Vec3(-0.009, -0.045, 0.0), 0.0, {0.025, 0.019, 0.015}, 0.016},
      {Vec3(-0.027, -0.045, 0.0), 0.0, {0.020, 0.015, 0.013}, 0.014},
  }};

  for (int f = 0; f < 5; ++f) {
    const FingerSpec& spec = fingers[static_cast<std::size_t>(f)];
    RigidTransform joint{rotation(Vec3(0, 0, spec.heading + pose.spread[static_cast<std::size_t>(f)])),
                         spec.base};
    RigidTransform frame = compose(pose.root, joint);
    for (int s = 0; s < 3; ++s) {
      // Flexion about the local x axis curls the tip towards the camera (-z).
      frame = compose(frame, RigidTransform{rotation(Vec3(-pose.curl[static_cast<std::size_t>(f)], 0, 0)),
                                            Vec3::Zero()});
      const double len = spec.lengths[static_cast<std::size_t>(s)];
      const double hw = spec.width / 2.0;
      append_box(mesh, frame, Vec3(-hw, -len, -hw), Vec3(hw, 0.0, hw));
      frame = compose(frame, RigidTransform{Mat3::Identity(), Vec3(0, -len, 0)});
    }
  }
  return mesh;
}

Image make_texture(int width, int height, std::uint32_t seed) {
  Image img(width, height);
  const double phase = 0.37 * static_cast<double>(seed % 97);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      const double r = 140 + 70 * std::sin(2 * std::numbers::pi * (2.0 * u + 0.5 * v) + phase);
      const double g = 120 + 60 * std::cos(2 * std::numbers::pi * (1.5 * v - 0.7 * u) + 0.5 * phase);
      const double b = 110 + 50 * std::sin(2 * std::numbers::pi * (1.2 * u + 1.8 * v) + 1.0);
      img(x, y) = {clamp_channel(r), clamp_channel(g), clamp_channel(b), 255};
    }
  }
  return img;
}

Image make_background(int width, int height) {
  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      img(x, y) = {clamp_channel(60 + 80 * u), clamp_channel(90 + 40 * std::sin(std::numbers::pi * v)),
                   clamp_channel(150 - 60 * v), 255};
    }
  }
  return img;
}

std::vector<Rgba> hand_vertex_colors(std::size_t vertex_count) {
  std::vector<Rgba> colors(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const double t = static_cast<double>(i);
    colors[i] = {clamp_channel(200 + 25 * std::sin(0.7 * t)), clamp_channel(150 + 25 * std::sin(1.3 * t + 1.0)),
                 clamp_channel(120 + 25 * std::sin(2.1 * t + 2.0)), 255};
  }
  return colors;
}

Rendering render(const RenderInputs& in) {
  if (in.scene == nullptr || in.background == nullptr) {
    throw Error(ErrorCode::SchemaError, "render needs a scene and a background");
  }
  const Scene& scene = *in.scene;
  const Camera& cam = scene.camera;
  if (!in.background->same_shape(cam.width, cam.height)) {
    throw Error(ErrorCode::SizeMismatch, "background does not match the camera size");
  }
  const bool has_object = !scene.object.faces.empty();
  if (has_object && (in.object_texture == nullptr || !scene.object.face_uvs)) {
    throw Error(ErrorCode::MissingObjectTexture, "object needs a texture and UVs to render");
  }
  if (in.hand_colors.size() != scene.hand.vertices.size()) {
    throw Error(ErrorCode::SizeMismatch, "one colour per hand vertex is required");
  }

  // Merge the two meshes the same way the pipeline does: hand faces first.
  std::vector<Vec3> vertices = scene.hand.vertices;
  std::vector<Face> faces = scene.hand.faces;
  std::vector<Instance> labels(faces.size(), Instance::Hand);
  const int hand_vertices = static_cast<int>(vertices.size());
  const int hand_faces = static_cast<int>(faces.size());
  if (has_object) {
    for (const auto& v : scene.object.vertices) {
      vertices.push_back(scene.object_pose.rotation * v + scene.object_pose.translation);
    }
    for (const auto& f : scene.object.faces) {
      faces.push_back({f[0] + hand_vertices, f[1] + hand_vertices, f[2] + hand_vertices});
      labels.push_back(Instance::Object);
    }
  }
  Mesh merged;
  merged.vertices = vertices;
  const ScreenCoords screen = project(cam, merged);

  Rendering out;
  out.raster = rasterize({screen, faces, labels}, cam.width, cam.height);
  out.image = *in.background;
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const int f = out.raster.face(x, y);
      if (f < 0) continue;
      const Bary& w = out.raster.bary(x, y);
      if (f < hand_faces) {
        std::array<double, 4> c{};
        for (int k = 0; k < 3; ++k) {
          const Rgba& vc = in.hand_colors[static_cast<std::size_t>(faces[f][k])];
          for (int ch = 0; ch < 4; ++ch) c[ch] += static_cast<double>(w[k]) * vc[ch];
        }
        out.image(x, y) = {clamp_channel(c[0]), clamp_channel(c[1]), clamp_channel(c[2]), clamp_channel(c[3])};
      } else {
        const FaceUv& uv = (*scene.object.face_uvs)[static_cast<std::size_t>(f - hand_faces)];
        Vec2 t = Vec2::Zero();
        for (int k = 0; k < 3; ++k) t += static_cast<double>(w[k]) * uv[k];
        const Image& tex = *in.object_texture;
        const auto c = sample_bilinear(tex, t.x() * tex.width(), (1.0 - t.y()) * tex.height());
        out.image(x, y) = {clamp_channel(c[0]), clamp_channel(c[1]), clamp_channel(c[2]), clamp_channel(c[3])};
      }
    }
  }
  return out;
}

DemoScene make_demo_scene(bool novel_pose, int image_size) {
  DemoScene demo;
  const double s = image_size;
  const Camera cam{1.6 * s, 1.6 * s, s / 2.0, s / 2.0, image_size, image_size};

  HandPose hand_src;
  hand_src.root = {rotation(Vec3(0.15, -0.35, 0.25)), Vec3(-0.035, 0.005, 0.42)};
  hand_src.curl = {0.25, 0.35, 0.3, 0.4, 0.45};
  hand_src.spread = {0.0, 0.08, 0.02, -0.04, -0.1};

  Scene src;
  src.camera = cam;
  src.hand = make_hand(hand_src);
  src.object = make_box(Vec3(0.045, 0.045, 0.045));
  src.object_pose = {rotation(Vec3(0.35, 0.55, 0.1)), Vec3(0.03, 0.01, 0.52)};

  Scene tgt = src;
  if (novel_pose) {
    HandPose hand_tgt = hand_src;
    hand_tgt.root = {rotation(Vec3(0.05, -0.15, 0.35)), Vec3(-0.045, 0.0, 0.43)};
    hand_tgt.curl = {0.4, 0.55, 0.5, 0.55, 0.6};
    tgt.hand = make_hand(hand_tgt);
    tgt.object_pose = {rotation(Vec3(0.6, 0.2, -0.15)), Vec3(0.035, 0.015, 0.5)};
  }

  demo.object_texture = make_texture(256, 256, 7);
  const Image background = make_background(image_size, image_size);
  const auto colors = hand_vertex_colors(src.hand.vertices.size());

  demo.source_image = render({&src, &demo.object_texture, &background, colors}).image;
  demo.target_render = render({&tgt, &demo.object_texture, &background, colors}).image;
  demo.source = std::move(src);
  demo.target = std::move(tgt);
  return demo;
}

}  // namespace topoflow::synthetic
