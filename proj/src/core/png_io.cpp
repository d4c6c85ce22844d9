/*
 * Copyright 2026 The cpdm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "cpdm/error.hpp"
#include "cpdm/harness.hpp"

namespace cpdm::png {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void on_error(png_structp ptr, png_const_charp msg) {
    auto* buf = static_cast<std::string*>(png_get_error_ptr(ptr));
    if (buf) *buf = msg;
    png_longjmp(ptr, 1);
}

void on_warning(png_structp, png_const_charp) {}

}  // namespace

Image read(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(ErrorKind::Input, "cannot open '" + path + "'");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        fail(ErrorKind::Input, "'" + path + "' is not a PNG file");
    }
    std::string message;
    png_structp ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_error, on_warning);
    png_infop info = png_create_info_struct(ptr);
    Image img;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    if (setjmp(png_jmpbuf(ptr))) {
        png_destroy_read_struct(&ptr, &info, nullptr);
        fail(ErrorKind::Input, "'" + path + "': " + message);
    }
    png_init_io(ptr, file.get());
    png_set_sig_bytes(ptr, 8);
    png_read_info(ptr, info);
    const int depth = png_get_bit_depth(ptr, info);
    const int type = png_get_color_type(ptr, info);
    if (depth != 8 && depth != 16) {
        png_destroy_read_struct(&ptr, &info, nullptr);
        fail(ErrorKind::Input, "'" + path + "': unsupported bit depth " + std::to_string(depth) + " (need 8 or 16)");
    }
    if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ptr);
    if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ptr);
    png_read_update_info(ptr, info);

    img.width = png_get_image_width(ptr, info);
    img.height = png_get_image_height(ptr, info);
    img.channels = png_get_channels(ptr, info);
    img.bit_depth = depth;
    const std::size_t stride = png_get_rowbytes(ptr, info);
    buffer.resize(stride * img.height);
    rows.resize(img.height);
    for (std::size_t r = 0; r < img.height; ++r) rows[r] = buffer.data() + r * stride;
    png_read_image(ptr, rows.data());
    png_read_end(ptr, info);
    png_textp text = nullptr;
    const int n_text = png_get_text(ptr, info, &text, nullptr);
    for (int i = 0; i < n_text; ++i) img.text.emplace_back(text[i].key, text[i].text ? text[i].text : "");
    png_destroy_read_struct(&ptr, &info, nullptr);

    if (img.channels != 1 && img.channels != 3) fail(ErrorKind::Input, "'" + path + "': unsupported channel count");
    const std::size_t count = img.width * img.height * img.channels;
    img.data.resize(count);
    if (depth == 16) {
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned v = (static_cast<unsigned>(buffer[2 * i]) << 8) | buffer[2 * i + 1];
            img.data[i] = static_cast<double>(v) / 65535.0;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) img.data[i] = static_cast<double>(buffer[i]) / 255.0;
    }
    return img;
}

void write16(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3) fail(ErrorKind::Io, "png: only 1 or 3 channels can be written");
    std::error_code ec;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) fail(ErrorKind::Io, "cannot create '" + path + "'");

    const std::size_t stride = img.width * img.channels * 2;
    std::vector<unsigned char> buffer(stride * img.height);
    for (std::size_t i = 0; i < img.width * img.height * img.channels; ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
        buffer[2 * i] = static_cast<unsigned char>(q >> 8);
        buffer[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
    }
    std::vector<png_bytep> rows(img.height);
    for (std::size_t r = 0; r < img.height; ++r) rows[r] = buffer.data() + r * stride;

    std::string message;
    png_structp ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_error, on_warning);
    png_infop info = png_create_info_struct(ptr);
    if (setjmp(png_jmpbuf(ptr))) {
        png_destroy_write_struct(&ptr, &info);
        fail(ErrorKind::Io, "'" + path + "': " + message);
    }
    png_init_io(ptr, file.get());
    png_set_IHDR(ptr, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 16,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_text> text(img.text.size());
    for (std::size_t i = 0; i < img.text.size(); ++i) {
        text[i].compression = PNG_TEXT_COMPRESSION_NONE;
        text[i].key = const_cast<char*>(img.text[i].first.c_str());
        text[i].text = const_cast<char*>(img.text[i].second.c_str());
    }
    if (!text.empty()) png_set_text(ptr, info, text.data(), static_cast<int>(text.size()));
    png_write_info(ptr, info);
    png_write_image(ptr, rows.data());
    png_write_end(ptr, nullptr);
    png_destroy_write_struct(&ptr, &info);
}

}  // namespace cpdm::png
