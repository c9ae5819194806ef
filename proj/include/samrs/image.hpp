// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"

namespace samrs {

/// 8-bit interleaved raster. Three-channel images are RGB.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c, 0) {}

    ImageSize size() const { return {width, height}; }
    std::uint8_t& at(int x, int y, int c = 0) { return pixels[(std::size_t(y) * width + x) * channels + c]; }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(std::size_t(y) * width + x) * channels + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

namespace detail {

inline Image from_mat(const cv::Mat& src) {
    cv::Mat m = src;
    if (m.depth() != CV_8U) {
        double lo = 0, hi = 0;
        cv::minMaxLoc(m.reshape(1), &lo, &hi);
        m.convertTo(m, CV_8U, hi > 255 ? 255.0 / hi : 1.0);
    }
    if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2RGB);
    else if (m.channels() == 3) cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
    else if (m.channels() != 1) throw IoError("unsupported channel count " + std::to_string(m.channels()));
    Image img(m.cols, m.rows, m.channels());
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint8_t>(y);
        std::copy(row, row + std::size_t(m.cols) * m.channels(), img.pixels.begin() + std::size_t(y) * m.cols * m.channels());
    }
    return img;
}

inline cv::Mat to_mat(const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw IoError("only 1- and 3-channel images can be written");
    cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        std::copy_n(img.pixels.begin() + std::size_t(y) * img.width * img.channels,
                    std::size_t(img.width) * img.channels, m.ptr<std::uint8_t>(y));
    }
    if (img.channels == 3) cv::cvtColor(m, m, cv::COLOR_RGB2BGR);
    return m;
}

}  // namespace detail

inline Image read_image(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw IoError("cannot read image " + path.string());
    return detail::from_mat(m);
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
    if (!cv::imwrite(path.string(), detail::to_mat(img))) throw IoError("cannot write image " + path.string());
}

inline std::vector<std::uint8_t> encode_png(const Image& img) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", detail::to_mat(img), buf)) throw IoError("PNG encoding failed");
    return buf;
}

inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw IoError("cannot decode image bytes");
    return detail::from_mat(m);
}

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw IoError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw IoError("invalid base64 payload");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace samrs
