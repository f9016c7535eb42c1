//! Golden values transcribed from the published label-mapping and
//! transfer-function tables.

/// (raw label, name, consolidated group)
pub const LABELS: [(u16, &str, u8); 120] = [
    (0, "Background/Other", 0),
    (1, "spleen", 1),
    (2, "kidney_right", 11),
    (3, "kidney_left", 11),
    (4, "gallbladder", 3),
    (5, "liver", 2),
    (6, "stomach", 3),
    (7, "pancreas", 3),
    (8, "adrenal_gland_right", 4),
    (9, "adrenal_gland_left", 4),
    (10, "lung_upper_lobe_left", 5),
    (11, "lung_lower_lobe_left", 5),
    (12, "lung_upper_lobe_right", 5),
    (13, "lung_middle_lobe_right", 5),
    (14, "lung_lower_lobe_right", 5),
    (15, "esophagus", 3),
    (16, "trachea", 6),
    (17, "thyroid_gland", 4),
    (18, "small_bowel", 3),
    (19, "duodenum", 3),
    (20, "colon", 3),
    (21, "urinary_bladder", 11),
    (22, "prostate", 11),
    (23, "kidney_cyst_left", 11),
    (24, "kidney_cyst_right", 11),
    (25, "sacrum", 7),
    (26, "vertebrae_S1", 7),
    (27, "vertebrae_L5", 7),
    (28, "vertebrae_L4", 7),
    (29, "vertebrae_L3", 7),
    (30, "vertebrae_L2", 7),
    (31, "vertebrae_L1", 7),
    (32, "vertebrae_T12", 7),
    (33, "vertebrae_T11", 7),
    (34, "vertebrae_T10", 7),
    (35, "vertebrae_T9", 7),
    (36, "vertebrae_T8", 7),
    (37, "vertebrae_T7", 7),
    (38, "vertebrae_T6", 7),
    (39, "vertebrae_T5", 7),
    (40, "vertebrae_T4", 7),
    (41, "vertebrae_T3", 7),
    (42, "vertebrae_T2", 7),
    (43, "vertebrae_T1", 7),
    (44, "vertebrae_C7", 7),
    (45, "vertebrae_C6", 7),
    (46, "vertebrae_C5", 7),
    (47, "vertebrae_C4", 7),
    (48, "vertebrae_C3", 7),
    (49, "vertebrae_C2", 7),
    (50, "vertebrae_C1", 7),
    (51, "heart", 8),
    (52, "aorta", 8),
    (53, "pulmonary_vein", 8),
    (54, "brachiocephalic_trunk", 8),
    (55, "subclavian_artery_right", 8),
    (56, "subclavian_artery_left", 8),
    (57, "common_carotid_artery_right", 8),
    (58, "common_carotid_artery_left", 8),
    (59, "brachiocephalic_vein_left", 8),
    (60, "brachiocephalic_vein_right", 8),
    (61, "atrial_appendage_left", 8),
    (62, "superior_vena_cava", 8),
    (63, "inferior_vena_cava", 8),
    (64, "portal_vein_and_splenic_vein", 8),
    (65, "iliac_artery_left", 8),
    (66, "iliac_artery_right", 8),
    (67, "iliac_vena_left", 8),
    (68, "iliac_vena_right", 8),
    (69, "humerus_left", 7),
    (70, "humerus_right", 7),
    (71, "scapula_left", 7),
    (72, "scapula_right", 7),
    (73, "clavicula_left", 7),
    (74, "clavicula_right", 7),
    (75, "femur_left", 7),
    (76, "femur_right", 7),
    (77, "hip_left", 7),
    (78, "hip_right", 7),
    (79, "spinal_cord", 9),
    (80, "gluteus_maximus_left", 10),
    (81, "gluteus_maximus_right", 10),
    (82, "gluteus_medius_left", 10),
    (83, "gluteus_medius_right", 10),
    (84, "gluteus_minimus_left", 10),
    (85, "gluteus_minimus_right", 10),
    (86, "autochthon_left", 10),
    (87, "autochthon_right", 10),
    (88, "iliopsoas_left", 10),
    (89, "iliopsoas_right", 10),
    (90, "brain", 9),
    (91, "skull", 7),
    (92, "rib_left_1", 7),
    (93, "rib_left_2", 7),
    (94, "rib_left_3", 7),
    (95, "rib_left_4", 7),
    (96, "rib_left_5", 7),
    (97, "rib_left_6", 7),
    (98, "rib_left_7", 7),
    (99, "rib_left_8", 7),
    (100, "rib_left_9", 7),
    (101, "rib_left_10", 7),
    (102, "rib_left_11", 7),
    (103, "rib_left_12", 7),
    (104, "rib_right_1", 7),
    (105, "rib_right_2", 7),
    (106, "rib_right_3", 7),
    (107, "rib_right_4", 7),
    (108, "rib_right_5", 7),
    (109, "rib_right_6", 7),
    (110, "rib_right_7", 7),
    (111, "rib_right_8", 7),
    (112, "rib_right_9", 7),
    (113, "rib_right_10", 7),
    (114, "rib_right_11", 7),
    (115, "rib_right_12", 7),
    (116, "sternum", 7),
    (117, "costal_cartilages", 7),
    (118, "Coronary Arteries (User-defined)", 8),
    (119, "Pulmonary Artery (User-defined)", 8),
];

/// Per group: control points as (HU, [R, G, B, A]).
pub const SEEN_TF: [&[(f64, [f64; 4])]; 12] = [
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (3072.0, [0.0, 0.0, 0.0, 0.0])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-150.0, [0.0, 0.0, 0.0, 0.0]), (20.0, [70.0, 50.0, 90.0, 0.05]), (80.0, [110.0, 80.0, 140.0, 0.2]), (180.0, [150.0, 120.0, 170.0, 0.5]), (250.0, [190.0, 160.0, 200.0, 0.7]), (3072.0, [220.0, 190.0, 230.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-20.0, [0.0, 0.0, 0.0, 0.0]), (30.0, [100.0, 70.0, 50.0, 0.1]), (90.0, [140.0, 100.0, 70.0, 0.3]), (180.0, [170.0, 130.0, 90.0, 0.6]), (250.0, [190.0, 150.0, 110.0, 0.75]), (3072.0, [210.0, 170.0, 130.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-50.0, [0.0, 0.0, 0.0, 0.0]), (20.0, [170.0, 140.0, 100.0, 0.05]), (80.0, [190.0, 160.0, 120.0, 0.25]), (180.0, [210.0, 180.0, 140.0, 0.55]), (250.0, [225.0, 195.0, 155.0, 0.7]), (3072.0, [240.0, 210.0, 170.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [0.0, 0.0, 0.0, 0.0]), (30.0, [160.0, 125.0, 35.0, 0.1]), (100.0, [200.0, 165.0, 70.0, 0.35]), (200.0, [220.0, 185.0, 80.0, 0.55]), (250.0, [240.0, 200.0, 90.0, 0.7]), (3072.0, [255.0, 225.0, 120.0, 0.75])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-850.0, [190.0, 180.0, 180.0, 0.0008]), (-500.0, [210.0, 200.0, 200.0, 0.0025]), (0.0, [230.0, 220.0, 220.0, 0.004]), (1000.0, [240.0, 230.0, 230.0, 0.006]), (3072.0, [245.0, 235.0, 235.0, 0.008])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-50.0, [0.0, 0.0, 0.0, 0.0]), (20.0, [220.0, 200.0, 190.0, 0.1]), (150.0, [230.0, 210.0, 200.0, 0.35]), (250.0, [240.0, 220.0, 210.0, 0.5]), (350.0, [245.0, 225.0, 215.0, 0.65]), (3072.0, [250.0, 230.0, 220.0, 0.75])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (100.0, [180.0, 30.0, 30.0, 0.1]), (180.0, [255.0, 215.0, 140.0, 0.6]), (280.0, [255.0, 240.0, 240.0, 0.9]), (350.0, [255.0, 255.0, 255.0, 1.0]), (3072.0, [255.0, 255.0, 255.0, 1.0])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-50.0, [0.0, 0.0, 0.0, 0.0]), (50.0, [120.0, 30.0, 30.0, 0.1]), (150.0, [160.0, 50.0, 50.0, 0.3]), (250.0, [180.0, 70.0, 70.0, 0.5]), (400.0, [200.0, 90.0, 90.0, 0.7]), (600.0, [220.0, 110.0, 110.0, 0.8]), (3072.0, [235.0, 150.0, 150.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-20.0, [0.0, 0.0, 0.0, 0.0]), (10.0, [175.0, 165.0, 115.0, 0.1]), (80.0, [215.0, 205.0, 155.0, 0.35]), (200.0, [230.0, 220.0, 170.0, 0.5]), (350.0, [240.0, 230.0, 180.0, 0.7]), (600.0, [245.0, 235.0, 195.0, 0.75]), (3072.0, [255.0, 245.0, 225.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [180.0, 120.0, 120.0, 0.05]), (100.0, [200.0, 140.0, 140.0, 0.25]), (200.0, [220.0, 160.0, 160.0, 0.4]), (250.0, [230.0, 170.0, 170.0, 0.55]), (500.0, [240.0, 180.0, 180.0, 0.7]), (3072.0, [245.0, 190.0, 190.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [200.0, 170.0, 150.0, 0.05]), (150.0, [210.0, 180.0, 160.0, 0.35]), (250.0, [220.0, 190.0, 170.0, 0.55]), (400.0, [230.0, 200.0, 180.0, 0.7]), (600.0, [235.0, 205.0, 185.0, 0.75]), (3072.0, [240.0, 210.0, 190.0, 0.85])],
];

/// Per group: control points as (HU, [R, G, B, A]).
pub const UNSEEN_TF: [&[(f64, [f64; 4])]; 12] = [
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (3072.0, [0.0, 0.0, 0.0, 0.0])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [0.0, 0.0, 0.0, 0.0]), (40.0, [150.0, 40.0, 130.0, 0.1]), (100.0, [190.0, 70.0, 160.0, 0.3]), (200.0, [220.0, 100.0, 190.0, 0.6]), (300.0, [240.0, 130.0, 210.0, 0.8]), (3072.0, [255.0, 160.0, 230.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (10.0, [0.0, 0.0, 0.0, 0.0]), (50.0, [130.0, 50.0, 30.0, 0.15]), (120.0, [160.0, 70.0, 50.0, 0.4]), (220.0, [180.0, 90.0, 70.0, 0.7]), (300.0, [195.0, 110.0, 85.0, 0.8]), (3072.0, [210.0, 130.0, 100.0, 0.9])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-20.0, [0.0, 0.0, 0.0, 0.0]), (30.0, [190.0, 140.0, 50.0, 0.1]), (90.0, [210.0, 160.0, 70.0, 0.3]), (190.0, [230.0, 180.0, 90.0, 0.6]), (280.0, [245.0, 200.0, 110.0, 0.75]), (3072.0, [255.0, 220.0, 130.0, 0.8])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (10.0, [0.0, 0.0, 0.0, 0.0]), (50.0, [50.0, 120.0, 130.0, 0.15]), (120.0, [70.0, 150.0, 160.0, 0.4]), (220.0, [90.0, 180.0, 190.0, 0.65]), (300.0, [110.0, 200.0, 210.0, 0.75]), (3072.0, [130.0, 220.0, 230.0, 0.8])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-900.0, [170.0, 190.0, 210.0, 0.001]), (-600.0, [190.0, 210.0, 230.0, 0.003]), (-100.0, [210.0, 230.0, 245.0, 0.005]), (500.0, [220.0, 240.0, 255.0, 0.007]), (3072.0, [230.0, 245.0, 255.0, 0.009])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (-80.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [180.0, 170.0, 190.0, 0.1]), (100.0, [200.0, 190.0, 210.0, 0.3]), (200.0, [220.0, 210.0, 230.0, 0.5]), (350.0, [235.0, 225.0, 245.0, 0.65]), (3072.0, [245.0, 235.0, 255.0, 0.7])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (100.0, [240.0, 248.0, 255.0, 0.0]), (180.0, [176.0, 196.0, 222.0, 0.8]), (350.0, [70.0, 130.0, 180.0, 1.0]), (3072.0, [70.0, 130.0, 180.0, 1.0])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [0.0, 0.0, 0.0, 0.0]), (70.0, [190.0, 20.0, 20.0, 0.2]), (180.0, [220.0, 40.0, 40.0, 0.5]), (300.0, [240.0, 60.0, 60.0, 0.75]), (500.0, [255.0, 80.0, 80.0, 0.85]), (700.0, [255.0, 120.0, 120.0, 0.9]), (3072.0, [255.0, 150.0, 150.0, 0.95])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (0.0, [0.0, 0.0, 0.0, 0.0]), (30.0, [120.0, 190.0, 140.0, 0.1]), (100.0, [150.0, 220.0, 170.0, 0.35]), (220.0, [180.0, 240.0, 200.0, 0.55]), (400.0, [200.0, 250.0, 220.0, 0.7]), (700.0, [220.0, 255.0, 235.0, 0.75]), (3072.0, [235.0, 255.0, 245.0, 0.8])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (20.0, [160.0, 90.0, 70.0, 0.1]), (120.0, [180.0, 110.0, 90.0, 0.3]), (220.0, [200.0, 130.0, 110.0, 0.5]), (350.0, [215.0, 150.0, 130.0, 0.7]), (600.0, [230.0, 170.0, 150.0, 0.8]), (3072.0, [240.0, 190.0, 170.0, 0.85])],
    &[(-1024.0, [0.0, 0.0, 0.0, 0.0]), (15.0, [190.0, 120.0, 60.0, 0.1]), (100.0, [210.0, 145.0, 80.0, 0.35]), (200.0, [225.0, 165.0, 100.0, 0.6]), (350.0, [240.0, 185.0, 120.0, 0.75]), (600.0, [250.0, 200.0, 140.0, 0.8]), (3072.0, [255.0, 215.0, 160.0, 0.85])],
];
