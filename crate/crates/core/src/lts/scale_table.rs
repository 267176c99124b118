// generated by examples/calibrate.rs
[
    // T = 24
    [
        [1.1831, 1.0527, 1.0307], // p = 1
        [1.4554, 1.1325, 1.0588], // p = 2
        [1.8777, 1.1914, 1.1370], // p = 3
        [2.4177, 1.3296, 1.1758], // p = 4
        [5.0830, 1.7159, 1.3198], // p = 6
        [14.6647, 2.2274, 1.5016], // p = 8
        [117.2947, 3.3248, 1.8423], // p = 10
        [f64::NAN, 5.9540, 2.3372], // p = 12
        [f64::NAN, 14.9579, 3.2910], // p = 14
        [f64::NAN, 123.2414, 5.6700], // p = 16
        [f64::NAN, f64::NAN, f64::NAN], // p = 20
        [f64::NAN, f64::NAN, f64::NAN], // p = 24
    ],
    // T = 36
    [
        [1.1234, 1.0329, 1.0179], // p = 1
        [1.2918, 1.0784, 1.0403], // p = 2
        [1.4913, 1.1493, 1.0812], // p = 3
        [1.7381, 1.2040, 1.1055], // p = 4
        [2.5128, 1.3762, 1.1658], // p = 6
        [3.5802, 1.5807, 1.2712], // p = 8
        [5.4073, 1.8666, 1.3728], // p = 10
        [9.5445, 2.2662, 1.5410], // p = 12
        [25.9047, 2.7789, 1.6627], // p = 14
        [200.5040, 3.6029, 1.8876], // p = 16
        [f64::NAN, 7.7340, 2.6535], // p = 20
        [f64::NAN, 56.5924, 4.5921], // p = 24
    ],
    // T = 48
    [
        [1.1002, 1.0251, 1.0120], // p = 1
        [1.2138, 1.0619, 1.0302], // p = 2
        [1.3382, 1.1069, 1.0503], // p = 3
        [1.5422, 1.1341, 1.0777], // p = 4
        [1.9206, 1.2335, 1.1120], // p = 6
        [2.3389, 1.3883, 1.1826], // p = 8
        [2.9540, 1.5446, 1.2474], // p = 10
        [3.6227, 1.7155, 1.3098], // p = 12
        [4.9986, 1.9175, 1.3883], // p = 14
        [7.5628, 2.2210, 1.4950], // p = 16
        [37.5660, 2.9391, 1.7083], // p = 20
        [f64::NAN, 4.3131, 2.1168], // p = 24
    ],
    // T = 72
    [
        [1.0678, 1.0168, 1.0092], // p = 1
        [1.1444, 1.0375, 1.0169], // p = 2
        [1.2154, 1.0648, 1.0411], // p = 3
        [1.3283, 1.1034, 1.0401], // p = 4
        [1.5373, 1.1650, 1.0922], // p = 6
        [1.7446, 1.2256, 1.1099], // p = 8
        [1.9320, 1.3201, 1.1585], // p = 10
        [2.1817, 1.3816, 1.1899], // p = 12
        [2.3712, 1.4640, 1.2451], // p = 14
        [2.7163, 1.5814, 1.2747], // p = 16
        [3.6041, 1.8336, 1.3751], // p = 20
        [5.5828, 2.1403, 1.5084], // p = 24
    ],
    // T = 96
    [
        [1.0534, 1.0141, 1.0051], // p = 1
        [1.1128, 1.0356, 1.0210], // p = 2
        [1.1715, 1.0549, 1.0257], // p = 3
        [1.2343, 1.0666, 1.0338], // p = 4
        [1.3749, 1.1160, 1.0614], // p = 6
        [1.5279, 1.1529, 1.0788], // p = 8
        [1.6762, 1.2132, 1.0953], // p = 10
        [1.8204, 1.2716, 1.1262], // p = 12
        [1.9919, 1.3239, 1.1467], // p = 14
        [2.1300, 1.4042, 1.1848], // p = 16
        [2.3827, 1.5198, 1.2550], // p = 20
        [2.6803, 1.7061, 1.3102], // p = 24
    ],
    // T = 144
    [
        [1.0355, 1.0094, 1.0052], // p = 1
        [1.0701, 1.0259, 1.0139], // p = 2
        [1.1212, 1.0315, 1.0269], // p = 3
        [1.1687, 1.0489, 1.0179], // p = 4
        [1.2423, 1.0775, 1.0332], // p = 6
        [1.3344, 1.0994, 1.0484], // p = 8
        [1.4374, 1.1410, 1.0593], // p = 10
        [1.5309, 1.1669, 1.0786], // p = 12
        [1.6476, 1.2071, 1.0922], // p = 14
        [1.7311, 1.2300, 1.1078], // p = 16
        [1.9574, 1.2929, 1.1433], // p = 20
        [2.1650, 1.3881, 1.1827], // p = 24
    ],
    // T = 240
    [
        [1.0217, 1.0054, 1.0029], // p = 1
        [1.0477, 1.0154, 1.0085], // p = 2
        [1.0691, 1.0189, 1.0079], // p = 3
        [1.0998, 1.0224, 1.0126], // p = 4
        [1.1489, 1.0437, 1.0177], // p = 6
        [1.2056, 1.0615, 1.0306], // p = 8
        [1.2499, 1.0805, 1.0396], // p = 10
        [1.3020, 1.0912, 1.0408], // p = 12
        [1.3613, 1.1144, 1.0573], // p = 14
        [1.4165, 1.1283, 1.0601], // p = 16
        [1.5354, 1.1665, 1.0831], // p = 20
        [1.6635, 1.2049, 1.1047], // p = 24
    ],
]
