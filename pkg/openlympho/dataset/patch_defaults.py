"""
Default inputs for the patch dataset:
- 1. Record geometry
- 2. Diagnostic classes
- 3. Corpus shape
- 4. Split counts
- 5. Random extraction
- 6. Synthetic texture table (versioned)
"""

# *** Default inputs: record geometry ***

patch_side = 40  # pixels
patch_pixels = patch_side * patch_side  # 1600 intensities
record_entries = patch_pixels + 1  # label first, then the intensities

# *** Default inputs: diagnostic classes ***

class_names = ['Benign', 'DLBCL', 'BL', 'SLL']  # label codes 0, 1, 2, 3
num_classes = len(class_names)

# *** Default inputs: corpus shape ***

corpus_data = {"cases": 128,  # 32 cases per class
               "sets_per_case": 4,
               "patches_per_set": 5,
               "seed": 0}

# *** Default inputs: split ***

split_data = {"train": 1856,  # images
              "val": 464,  # images
              "test_sets": 48,  # whole set-groups, 12 per class
              "seed": 0,
              "case_disjoint": False}

val_fraction = 0.2  # of the non-test images when counts are derived (464 / 2320)
reference_test_sets_per_class = 12  # for 128 set-groups per class

# *** Default inputs: random extraction ***

extract_data = {"background_threshold": None,  # off by default
                "default_threshold": 240,  # mean intensity used when rejection is switched on
                "max_attempts_per_patch": 50}

# *** Default inputs: synthetic textures ***
# Version 1 is frozen: acceptance numbers are recorded against it. Changes go in a new version.

benign_texture_data = {"name": 'Benign',
                       "field": 230,  # light background
                       "blob_count": 3,  # sparse large soft blobs
                       "blob_radius": 6,
                       "radius_jitter": 1,
                       "contrast": -70,
                       "softness": 2.0}  # gaussian sigma applied to the blob mask

dlbcl_texture_data = {"name": 'DLBCL',
                      "field": 230,
                      "blob_count": 10,  # large dark blobs
                      "blob_radius": 4,
                      "radius_jitter": 1,
                      "contrast": -100,
                      "softness": 0.0}

bl_texture_data = {"name": 'BL',
                   "field": 110,  # dense dark field ("starry sky")
                   "blob_count": 6,  # scattered bright holes
                   "blob_radius": 3,
                   "radius_jitter": 0.5,
                   "contrast": 110,
                   "softness": 1.0}

sll_texture_data = {"name": 'SLL',
                    "field": 230,
                    "blob_count": 90,  # dense small dark dots
                    "blob_radius": 2,
                    "radius_jitter": 0.5,
                    "contrast": -80,
                    "softness": 0.0}

synth_parameter_table = {"version": 1,
                         "noise_sd": 8,
                         "textures": [benign_texture_data, dlbcl_texture_data, bl_texture_data, sll_texture_data]}
